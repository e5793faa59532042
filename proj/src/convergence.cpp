#include "trifv/convergence.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "trifv/direct_solver.hpp"
#include "trifv/mesh.hpp"
#include "trifv/numfmt.hpp"
#include "trifv/partition.hpp"
#include "trifv/poisson.hpp"
#include "trifv/transport.hpp"

namespace trifv {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
using std::numbers::pi;

void measure(const Subdomain &sub, std::span<const double> approx,
             std::span<const double> exact, ConvergenceRow &row) {
  double linf = 0.0, l2 = 0.0;
  for (std::size_t c = 0; c < sub.own_count(); ++c) {
    const double e = std::abs(approx[c] - exact[c]);
    linf = std::max(linf, e);
    l2 += sub.cells[c].area * e * e;
  }
  row.linf = linf;
  row.l2 = std::sqrt(l2);
}

ConvergenceRow poisson_sine(std::size_t n) {
  const Mesh mesh = structured_mesh(n);
  const auto diamonds = build_diamonds(mesh);
  const auto weights = node_weights(mesh);
  const auto bc = BoundarySpec::all(BoundaryCondition::dirichlet(0.0));
  const auto a = assemble_matrix(mesh, diamonds, weights, bc);

  std::vector<double> f(mesh.cell_count()), exact(mesh.cell_count());
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const Vec2 p = mesh.cells()[c].centroid;
    exact[c] = std::sin(pi * p.x) * std::sin(pi * p.y);
    f[c] = 2.0 * pi * pi * exact[c];
  }
  const auto b = assemble_rhs(mesh, diamonds, f, bc);
  const auto x = solve(factorize(a), b);

  ConvergenceRow row;
  const Subdomain sub = whole_mesh_subdomain(mesh);
  measure(sub, x, exact, row);
  row.residual = relative_residual(a, x, b);
  return row;
}

/// Explicit transport of a closed-form solution `exact(p, t)` up to `t_end`
/// with a CFL-limited step evenly dividing the interval.
template <typename Exact>
ConvergenceRow transport_case(std::size_t n, Vec2 velocity, double diffusion, double t_end,
                              Exact exact) {
  const Mesh mesh = structured_mesh(n);
  const Subdomain sub = whole_mesh_subdomain(mesh);
  const auto bc = BoundarySpec::all(BoundaryCondition::dirichlet(exact));

  const std::vector<Vec2> vel(sub.faces.size(), velocity);
  const std::vector<double> diff(sub.faces.size(), diffusion);
  const double dt_max = stable_dt(sub, vel, diff, 0.4);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt_max));
  const double dt = t_end / static_cast<double>(steps);

  Field u;
  u.values.resize(sub.local_count());
  for (std::size_t c = 0; c < sub.local_count(); ++c)
    u.values[c] = exact(sub.cells[c].centroid, 0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    u = explicit_step(sub, u, residuals(sub, u, vel, diff, bc), dt);
    u.time = dt * static_cast<double>(s + 1);
  }

  std::vector<double> ref(sub.local_count());
  for (std::size_t c = 0; c < ref.size(); ++c) ref[c] = exact(sub.cells[c].centroid, t_end);
  ConvergenceRow row;
  measure(sub, u.values, ref, row);
  row.residual = nan;
  return row;
}

ConvergenceRow advect_gauss(std::size_t n) {
  const Vec2 v{1.0, 0.5};
  const Vec2 c0{0.3, 0.35};
  const double s2 = 0.1 * 0.1;
  return transport_case(n, v, 0.0, 0.4, [=](Vec2 p, double t) {
    const Vec2 d = p - (c0 + t * v);
    return std::exp(-dot(d, d) / (2.0 * s2));
  });
}

ConvergenceRow diffuse_gauss(std::size_t n) {
  const double diffusion = 1.0;
  const Vec2 c0{0.5, 0.5};
  const double s2 = 0.1 * 0.1;
  return transport_case(n, {}, diffusion, 0.01, [=](Vec2 p, double t) {
    const double w = s2 + 2.0 * diffusion * t;
    const Vec2 d = p - c0;
    return s2 / w * std::exp(-dot(d, d) / (2.0 * w));
  });
}

} // namespace

ConvergenceRow convergence_case(const std::string &case_id, std::size_t n) {
  ConvergenceRow row;
  if (case_id == "poisson_sine") row = poisson_sine(n);
  else if (case_id == "advect_gauss") row = advect_gauss(n);
  else if (case_id == "diffuse_gauss") row = diffuse_gauss(n);
  else throw UnknownCase(case_id);
  row.size = n;
  row.h = 1.0 / static_cast<double>(n);
  row.order_linf = row.order_l2 = nan;
  return row;
}

ConvergenceTable run_convergence(const std::string &case_id,
                                 const std::vector<std::size_t> &sizes) {
  if (case_id != "poisson_sine" && case_id != "advect_gauss" && case_id != "diffuse_gauss")
    throw UnknownCase(case_id);
  ConvergenceTable t{case_id, {}};
  for (auto n : sizes) {
    auto row = convergence_case(case_id, n);
    if (!t.rows.empty()) {
      const auto &prev = t.rows.back();
      const double ratio = std::log2(prev.h / row.h);
      row.order_linf = std::log2(prev.linf / row.linf) / ratio;
      row.order_l2 = std::log2(prev.l2 / row.l2) / ratio;
    }
    t.rows.push_back(row);
  }
  return t;
}

void write_convergence_csv(std::ostream &out, const ConvergenceTable &t) {
  out << "N,h,linf,l2,order_linf,order_l2,residual\n";
  for (const auto &r : t.rows)
    out << r.size << ',' << format_double(r.h) << ',' << format_double(r.linf) << ','
        << format_double(r.l2) << ',' << format_double(r.order_linf) << ','
        << format_double(r.order_l2) << ',' << format_double(r.residual) << '\n';
}

} // namespace trifv
