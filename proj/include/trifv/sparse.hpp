#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace trifv {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Square sparse matrix in compressed sparse row form. Column indices are
/// sorted and unique within each row; explicit zeros are allowed so the
/// pattern can stay structurally symmetric.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> vals;

  std::size_t nnz() const noexcept { return col_idx.size(); }

  /// Duplicates are summed.
  static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries);
  static CsrMatrix identity(std::size_t n);
  static CsrMatrix from_dense(std::size_t n, std::span<const double> row_major);

  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> to_dense() const;
  double at(std::size_t i, std::size_t j) const;
  bool structurally_symmetric() const;
  double max_abs() const;
  double frobenius_norm() const;
};

/// Matrix Market "coordinate real general" text.
void write_matrix_market(const CsrMatrix &a, std::ostream &out);
CsrMatrix read_matrix_market(std::istream &in);

double norm2(std::span<const double> v);

} // namespace trifv
