#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "trifv/errors.hpp"

namespace trifv {

class UnknownCase : public Error {
public:
  explicit UnknownCase(const std::string &id)
      : Error(ErrorClass::config, "unknown convergence case '" + id +
                                      "' (expected poisson_sine, advect_gauss or diffuse_gauss)") {}
};

struct ConvergenceRow {
  std::size_t size = 0; // squares per side of the structured mesh
  double h = 0.0;
  double linf = 0.0;
  double l2 = 0.0;       // sqrt(sum mu_i e_i^2)
  double order_linf = 0.0; // log2(e_{2h} / e_h); NaN on the first row
  double order_l2 = 0.0;
  double residual = 0.0; // relative linear-solver residual; NaN for transport cases
};

struct ConvergenceTable {
  std::string case_id;
  std::vector<ConvergenceRow> rows;
};

/// Errors of one manufactured problem on a structured N x N mesh:
///  - poisson_sine: -Laplace(P) = 2 pi^2 sin(pi x) sin(pi y), P = 0 on the
///    boundary, exact P = sin(pi x) sin(pi y);
///  - advect_gauss: pure upwind advection of a Gaussian by a uniform
///    velocity, exact inflow data;
///  - diffuse_gauss: heat-kernel spreading of a Gaussian, exact boundary
///    data.
ConvergenceRow convergence_case(const std::string &case_id, std::size_t n);

/// One row per size, in the given order; orders compare consecutive rows.
ConvergenceTable run_convergence(const std::string &case_id,
                                 const std::vector<std::size_t> &sizes);

/// `N,h,linf,l2,order_linf,order_l2,residual` rows.
void write_convergence_csv(std::ostream &out, const ConvergenceTable &table);

} // namespace trifv
