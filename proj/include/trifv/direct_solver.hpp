#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <vector>

#include "trifv/sparse.hpp"

namespace trifv {

/// Compressed sparse column storage for one triangular factor.
struct CscMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> col_ptr{0};
  std::vector<std::size_t> row_idx;
  std::vector<double> vals;
};

/// Sparse LU factors with P_r A P_c = L U, where
/// (P_r A P_c)(k, j) = A(perm_row[k], perm_col[j]).
///
/// L is unit lower triangular with the unit diagonal stored first in each
/// column; U is upper triangular with the diagonal stored last.
struct LuFactors {
  std::size_t n = 0;
  std::vector<std::size_t> perm_row;
  std::vector<std::size_t> perm_col;
  CscMatrix L;
  CscMatrix U;
  std::size_t fill_nnz = 0;
};

/// Process-wide instrumentation for the assemble-once / factor-once
/// contract.
struct SolverCounters {
  std::atomic<std::size_t> assemblies{0};
  std::atomic<std::size_t> factorizations{0};
  std::atomic<std::size_t> solves{0};

  void reset() {
    assemblies = 0;
    factorizations = 0;
    solves = 0;
  }
};

SolverCounters &solver_counters();

/// Reverse Cuthill-McKee ordering of the symmetrised pattern. Each
/// component starts from a pseudo-peripheral vertex; neighbours are
/// visited by increasing degree, lowest index first. result[k] is the
/// original index placed at position k.
std::vector<std::size_t> reorder(const CsrMatrix &a);

/// Half bandwidth max |p(i) - p(j)| over nonzeros under ordering `perm`.
std::size_t bandwidth(const CsrMatrix &a, std::span<const std::size_t> perm);

struct FactorOptions {
  bool use_ordering = true;
  /// Keep the diagonal as pivot while |a_kk| >= threshold * max |column|.
  double pivot_threshold = 0.1;
};

/// Left-looking sparse LU (sparse triangular solve per column over the
/// reach of the column pattern) with threshold partial pivoting. Throws
/// SingularMatrix, naming the original column, when the best pivot is
/// below 1e-14 * max |A|.
LuFactors factorize(const CsrMatrix &a, const FactorOptions &opt = {});

/// Caller-owned scratch space so concurrent solves can share factors.
struct SolveWorkspace {
  std::vector<double> w;
};

std::vector<double> solve(const LuFactors &f, std::span<const double> b,
                          SolveWorkspace &ws);
std::vector<double> solve(const LuFactors &f, std::span<const double> b);

/// Dense partial-pivot Gaussian elimination; test oracle for n <= 500.
std::vector<double> dense_lu_oracle(std::size_t n, std::span<const double> row_major,
                                    std::span<const double> b);

/// ||A x - b||_2 / ||b||_2 (or ||A x||_2 when b is zero).
double relative_residual(const CsrMatrix &a, std::span<const double> x,
                         std::span<const double> b);

} // namespace trifv
