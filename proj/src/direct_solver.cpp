#include "trifv/direct_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "trifv/errors.hpp"

namespace trifv {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// Symmetrised adjacency without the diagonal, neighbours ascending.
std::vector<std::vector<std::size_t>> symmetric_pattern(const CsrMatrix &a) {
  std::vector<std::vector<std::size_t>> adj(a.n);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const std::size_t j = a.col_idx[p];
      if (i == j) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  for (auto &l : adj) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return adj;
}

// BFS levels from `root` restricted to unvisited vertices; returns the
// vertices of the last level.
std::vector<std::size_t> last_level(const std::vector<std::vector<std::size_t>> &adj,
                                    std::size_t root, const std::vector<bool> &done,
                                    std::size_t &depth) {
  std::vector<std::size_t> level(adj.size(), npos);
  std::vector<std::size_t> frontier{root}, next;
  level[root] = 0;
  depth = 0;
  while (true) {
    next.clear();
    for (auto v : frontier)
      for (auto w : adj[v])
        if (!done[w] && level[w] == npos) {
          level[w] = depth + 1;
          next.push_back(w);
        }
    if (next.empty()) return frontier;
    ++depth;
    std::swap(frontier, next);
  }
}

} // namespace

SolverCounters &solver_counters() {
  static SolverCounters counters;
  return counters;
}

std::vector<std::size_t> reorder(const CsrMatrix &a) {
  const auto adj = symmetric_pattern(a);
  const std::size_t n = a.n;
  std::vector<bool> done(n, false);
  std::vector<std::size_t> order;
  order.reserve(n);

  auto by_degree = [&](std::size_t x, std::size_t y) {
    return adj[x].size() != adj[y].size() ? adj[x].size() < adj[y].size() : x < y;
  };

  while (order.size() < n) {
    // Lowest-degree unvisited vertex seeds the component.
    std::size_t root = npos;
    for (std::size_t v = 0; v < n; ++v)
      if (!done[v] && (root == npos || by_degree(v, root))) root = v;

    // Pseudo-peripheral vertex: hop to a min-degree vertex of the last BFS
    // level while the eccentricity keeps growing.
    std::size_t depth = 0;
    auto far = last_level(adj, root, done, depth);
    for (int it = 0; it < 8; ++it) {
      const std::size_t cand = *std::min_element(far.begin(), far.end(), by_degree);
      std::size_t cand_depth = 0;
      auto cand_far = last_level(adj, cand, done, cand_depth);
      if (cand_depth <= depth) break;
      root = cand;
      depth = cand_depth;
      far = std::move(cand_far);
    }

    const std::size_t start = order.size();
    order.push_back(root);
    done[root] = true;
    std::vector<std::size_t> nbrs;
    for (std::size_t head = start; head < order.size(); ++head) {
      nbrs.clear();
      for (auto w : adj[order[head]])
        if (!done[w]) nbrs.push_back(w);
      std::sort(nbrs.begin(), nbrs.end(), by_degree);
      for (auto w : nbrs) {
        done[w] = true;
        order.push_back(w);
      }
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

std::size_t bandwidth(const CsrMatrix &a, std::span<const std::size_t> perm) {
  std::vector<std::size_t> inv(a.n);
  for (std::size_t k = 0; k < a.n; ++k) inv[perm[k]] = k;
  std::size_t bw = 0;
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const std::size_t x = inv[i], y = inv[a.col_idx[p]];
      bw = std::max(bw, x > y ? x - y : y - x);
    }
  return bw;
}

LuFactors factorize(const CsrMatrix &a, const FactorOptions &opt) {
  const std::size_t n = a.n;
  LuFactors f;
  f.n = n;
  f.perm_col = opt.use_ordering ? reorder(a) : [n] {
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), std::size_t{0});
    return id;
  }();
  std::vector<std::size_t> inv(n);
  for (std::size_t k = 0; k < n; ++k) inv[f.perm_col[k]] = k;

  // Symmetrically permuted matrix in CSC: Ap(i, j) = A(perm[i], perm[j]).
  CscMatrix ap;
  ap.n = n;
  ap.col_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      ++ap.col_ptr[inv[a.col_idx[p]] + 1];
  for (std::size_t j = 0; j < n; ++j) ap.col_ptr[j + 1] += ap.col_ptr[j];
  ap.row_idx.resize(a.nnz());
  ap.vals.resize(a.nnz());
  {
    std::vector<std::size_t> next(ap.col_ptr.begin(), ap.col_ptr.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        const std::size_t q = next[inv[a.col_idx[p]]]++;
        ap.row_idx[q] = inv[i];
        ap.vals[q] = a.vals[p];
      }
  }

  const double tiny = 1e-14 * a.max_abs();
  CscMatrix &L = f.L;
  CscMatrix &U = f.U;
  L.n = U.n = n;
  L.col_ptr.assign(n + 1, 0);
  U.col_ptr.assign(n + 1, 0);
  const std::size_t guess = 4 * a.nnz() + n;
  L.row_idx.reserve(guess);
  L.vals.reserve(guess);
  U.row_idx.reserve(guess);
  U.vals.reserve(guess);

  std::vector<std::size_t> pinv(n, npos);
  std::vector<double> x(n, 0.0);
  std::vector<std::size_t> mark(n, npos);
  std::vector<std::size_t> stack, pstack, postorder;
  stack.reserve(n);
  pstack.reserve(n);
  postorder.reserve(n);

  for (std::size_t k = 0; k < n; ++k) {
    L.col_ptr[k] = L.row_idx.size();
    U.col_ptr[k] = U.row_idx.size();

    // Reach of column k's pattern in the graph of L: nodes that become
    // nonzero in the solve of L x = Ap(:, k), in reverse topological order.
    postorder.clear();
    for (std::size_t p = ap.col_ptr[k]; p < ap.col_ptr[k + 1]; ++p) {
      const std::size_t root = ap.row_idx[p];
      if (mark[root] == k) continue;
      stack.assign(1, root);
      pstack.assign(1, 0);
      mark[root] = k;
      {
        const std::size_t J = pinv[root];
        pstack[0] = J == npos ? 0 : L.col_ptr[J] + 1;
      }
      while (!stack.empty()) {
        const std::size_t j = stack.back();
        const std::size_t J = pinv[j];
        const std::size_t end = J == npos ? 0 : L.col_ptr[J + 1];
        bool descended = false;
        for (std::size_t &q = pstack.back(); J != npos && q < end; ++q) {
          const std::size_t i = L.row_idx[q];
          if (mark[i] == k) continue;
          mark[i] = k;
          ++q;
          stack.push_back(i);
          const std::size_t I = pinv[i];
          pstack.push_back(I == npos ? 0 : L.col_ptr[I] + 1);
          descended = true;
          break;
        }
        if (!descended) {
          postorder.push_back(j);
          stack.pop_back();
          pstack.pop_back();
        }
      }
    }

    for (auto i : postorder) x[i] = 0.0;
    for (std::size_t p = ap.col_ptr[k]; p < ap.col_ptr[k + 1]; ++p)
      x[ap.row_idx[p]] = ap.vals[p];

    for (auto it = postorder.rbegin(); it != postorder.rend(); ++it) {
      const std::size_t j = *it;
      const std::size_t J = pinv[j];
      if (J == npos) continue;
      const double xj = x[j];
      for (std::size_t q = L.col_ptr[J] + 1; q < L.col_ptr[J + 1]; ++q)
        x[L.row_idx[q]] -= L.vals[q] * xj;
    }

    std::size_t ipiv = npos;
    double amax = -1.0;
    for (auto i : postorder) {
      if (pinv[i] == npos) {
        if (std::abs(x[i]) > amax || (std::abs(x[i]) == amax && i < ipiv)) {
          amax = std::abs(x[i]);
          ipiv = i;
        }
      } else {
        U.row_idx.push_back(pinv[i]);
        U.vals.push_back(x[i]);
      }
    }
    if (ipiv == npos || !(amax > tiny)) throw SingularMatrix(f.perm_col[k]);
    if (mark[k] == k && pinv[k] == npos && std::abs(x[k]) >= opt.pivot_threshold * amax)
      ipiv = k;

    const double pivot = x[ipiv];
    U.row_idx.push_back(k);
    U.vals.push_back(pivot);
    pinv[ipiv] = k;
    L.row_idx.push_back(ipiv);
    L.vals.push_back(1.0);
    for (auto i : postorder)
      if (pinv[i] == npos) {
        L.row_idx.push_back(i);
        L.vals.push_back(x[i] / pivot);
      }
  }
  L.col_ptr[n] = L.row_idx.size();
  U.col_ptr[n] = U.row_idx.size();
  for (auto &r : L.row_idx) r = pinv[r];

  f.perm_row.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm_row[pinv[i]] = f.perm_col[i];
  f.fill_nnz = L.row_idx.size() + U.row_idx.size();
  ++solver_counters().factorizations;
  return f;
}

std::vector<double> solve(const LuFactors &f, std::span<const double> b,
                          SolveWorkspace &ws) {
  const std::size_t n = f.n;
  if (b.size() != n)
    throw DimensionMismatch("right-hand side has length " + std::to_string(b.size()) +
                            ", expected " + std::to_string(n));
  auto &w = ws.w;
  w.resize(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = b[f.perm_row[k]];
  for (std::size_t j = 0; j < n; ++j) {
    const double wj = w[j];
    for (std::size_t q = f.L.col_ptr[j] + 1; q < f.L.col_ptr[j + 1]; ++q)
      w[f.L.row_idx[q]] -= f.L.vals[q] * wj;
  }
  for (std::size_t j = n; j-- > 0;) {
    const std::size_t last = f.U.col_ptr[j + 1] - 1;
    w[j] /= f.U.vals[last];
    const double wj = w[j];
    for (std::size_t q = f.U.col_ptr[j]; q < last; ++q) w[f.U.row_idx[q]] -= f.U.vals[q] * wj;
  }
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[f.perm_col[j]] = w[j];
  ++solver_counters().solves;
  return x;
}

std::vector<double> solve(const LuFactors &f, std::span<const double> b) {
  SolveWorkspace ws;
  return solve(f, b, ws);
}

std::vector<double> dense_lu_oracle(std::size_t n, std::span<const double> row_major,
                                    std::span<const double> b) {
  if (row_major.size() != n * n || b.size() != n)
    throw DimensionMismatch("dense system dimensions disagree");
  std::vector<double> a(row_major.begin(), row_major.end());
  std::vector<double> x(b.begin(), b.end());
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (!(std::abs(a[piv * n + k]) > 1e-14 * scale)) throw SingularMatrix(k);
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(x[k], x[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = a[i * n + k] / a[k * n + k];
      if (m == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
      x[i] -= m * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = x[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k * n + j] * x[j];
    x[k] = s / a[k * n + k];
  }
  return x;
}

double relative_residual(const CsrMatrix &a, std::span<const double> x,
                         std::span<const double> b) {
  auto r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

} // namespace trifv
