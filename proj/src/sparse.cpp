#include "trifv/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "trifv/errors.hpp"
#include "trifv/numfmt.hpp"

namespace trifv {

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<Triplet> entries) {
  for (const auto &t : entries)
    if (t.row >= n || t.col >= n)
      throw DimensionMismatch("triplet outside a " + std::to_string(n) + "x" +
                              std::to_string(n) + " matrix");
  std::sort(entries.begin(), entries.end(), [](const Triplet &a, const Triplet &b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  for (std::size_t p = 0; p < entries.size(); ++p) {
    const auto &t = entries[p];
    if (!m.col_idx.empty() && p > 0 && entries[p - 1].row == t.row &&
        entries[p - 1].col == t.col) {
      m.vals.back() += t.value;
      continue;
    }
    m.col_idx.push_back(t.col);
    m.vals.push_back(t.value);
    ++m.row_ptr[t.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m;
  m.n = n;
  m.row_ptr.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) m.row_ptr[i] = i;
  m.col_idx.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.col_idx[i] = i;
  m.vals.assign(n, 1.0);
  return m;
}

CsrMatrix CsrMatrix::from_dense(std::size_t n, std::span<const double> a) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a[i * n + j] != 0.0) t.push_back({i, j, a[i * n + j]});
  return from_triplets(n, std::move(t));
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n) throw DimensionMismatch("vector length does not match matrix");
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) acc += vals[p] * x[col_idx[p]];
    y[i] = acc;
  }
  return y;
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) d[i * n + col_idx[p]] = vals[p];
  return d;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  auto it = std::lower_bound(first, last, j);
  return it != last && *it == j ? vals[static_cast<std::size_t>(it - col_idx.begin())] : 0.0;
}

bool CsrMatrix::structurally_symmetric() const {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      const std::size_t j = col_idx[p];
      const auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[j]);
      const auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[j + 1]);
      if (!std::binary_search(first, last, i)) return false;
    }
  return true;
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : vals) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::frobenius_norm() const { return norm2(vals); }

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void write_matrix_market(const CsrMatrix &a, std::ostream &out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      out << i + 1 << ' ' << a.col_idx[p] + 1 << ' ' << format_double(a.vals[p]) << '\n';
}

CsrMatrix read_matrix_market(std::istream &in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty Matrix Market stream");
  ++line_no;
  if (line.rfind("%%MatrixMarket matrix coordinate real", 0) != 0)
    throw ParseError(line_no, "unsupported Matrix Market header");
  const bool symmetric = line.find("symmetric") != std::string::npos;

  std::size_t rows = 0, cols = 0, nnz = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows != cols)
      throw ParseError(line_no, "expected square 'rows cols nnz'");
    break;
  }
  std::vector<Triplet> t;
  t.reserve(nnz);
  std::size_t read = 0;
  while (read < nnz && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    std::size_t i = 0, j = 0;
    std::string val;
    double v = 0.0;
    if (!(ss >> i >> j >> val) || !parse_double(val, v) || i == 0 || j == 0 ||
        i > rows || j > cols)
      throw ParseError(line_no, "bad coordinate entry");
    t.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
    ++read;
  }
  if (read != nnz) throw ParseError(line_no, "fewer entries than declared");
  return CsrMatrix::from_triplets(rows, std::move(t));
}

} // namespace trifv
