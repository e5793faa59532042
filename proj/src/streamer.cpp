#include "trifv/streamer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "trifv/errors.hpp"
#include "trifv/numfmt.hpp"

namespace trifv {

namespace {

template <typename Member>
double interpolate(const std::vector<CoefficientRow> &table, double field, Member m) {
  if (table.empty()) throw ConfigError("coefficient table is empty");
  if (field <= table.front().field) return table.front().*m;
  if (field >= table.back().field) return table.back().*m;
  auto hi = std::upper_bound(table.begin(), table.end(), field,
                             [](double f, const CoefficientRow &r) { return f < r.field; });
  auto lo = hi - 1;
  const double t = (field - lo->field) / (hi->field - lo->field);
  return (*lo).*m + t * ((*hi).*m - (*lo).*m);
}

} // namespace

double StreamerCoefficients::mobility(double field) const {
  return model == Model::linear ? mu_e : interpolate(table, field, &CoefficientRow::mobility);
}

double StreamerCoefficients::diffusion(double field) const {
  return model == Model::linear ? D_e : interpolate(table, field, &CoefficientRow::diffusion);
}

double StreamerCoefficients::ionization(double field) const {
  return model == Model::linear ? alpha : interpolate(table, field, &CoefficientRow::alpha);
}

std::vector<CoefficientRow> load_coefficient_table(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open coefficient table '" + path + "'");
  std::vector<CoefficientRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const bool may_be_header = std::exchange(first, false);
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      cells.push_back(cell);
    }
    CoefficientRow r;
    if (cells.size() != 4 || !parse_double(cells[0], r.field) ||
        !parse_double(cells[1], r.mobility) || !parse_double(cells[2], r.diffusion) ||
        !parse_double(cells[3], r.alpha)) {
      if (may_be_header) continue;
      throw ParseError(line_no, "expected 'field,mobility,diffusion,alpha'");
    }
    if (r.diffusion < 0.0) throw ParseError(line_no, "negative diffusion coefficient");
    if (!rows.empty() && !(r.field > rows.back().field))
      throw ParseError(line_no, "field values must increase");
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError("coefficient table '" + path + "' has no rows");
  return rows;
}

std::vector<double> poisson_source(const Subdomain &sub, const StreamerState &s,
                                   const StreamerCoefficients &coeffs) {
  std::vector<double> f(sub.own_count());
  const double scale = coeffs.q_e / coeffs.eps;
  for (std::size_t c = 0; c < f.size(); ++c)
    f[c] = scale * (s.n_i.values[c] - s.n_e.values[c]);
  return f;
}

std::vector<Vec2> electric_field(const Subdomain &sub, const Field &potential,
                                 const BoundarySpec &potential_bc) {
  const auto nodes = node_values(sub, potential, potential_bc);
  auto e = face_gradients(sub, potential, nodes, potential_bc);
  for (auto &v : e) v = -v;
  return e;
}

void update_electric_field(const Subdomain &sub, StreamerState &s,
                           const BoundarySpec &potential_bc) {
  s.e_field = electric_field(sub, s.potential, potential_bc);
  s.e_norm.resize(s.e_field.size());
  for (std::size_t f = 0; f < s.e_field.size(); ++f) s.e_norm[f] = norm(s.e_field[f]);
}

DriftCoefficients drift_coefficients(const Subdomain &sub, const StreamerState &s,
                                     const StreamerCoefficients &coeffs) {
  DriftCoefficients d;
  const std::size_t nf = sub.faces.size();
  d.velocity.resize(nf);
  d.diffusion.resize(nf);
  std::vector<double> speed(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const double mu = coeffs.mobility(s.e_norm[f]);
    d.velocity[f] = -mu * s.e_field[f];
    d.diffusion[f] = coeffs.diffusion(s.e_norm[f]);
    speed[f] = norm(d.velocity[f]);
  }
  d.cell_speed.resize(sub.own_count());
  d.cell_alpha.resize(sub.own_count());
  for (std::size_t c = 0; c < sub.own_count(); ++c) {
    double v = 0.0, e = 0.0;
    for (auto f : sub.cell_faces[c]) {
      v += speed[f];
      e += s.e_norm[f];
    }
    d.cell_speed[c] = v / 3.0;
    d.cell_alpha[c] = coeffs.ionization(e / 3.0);
  }
  return d;
}

std::vector<double> ionization_source(const Subdomain &sub, const StreamerState &s,
                                      const DriftCoefficients &drift) {
  std::vector<double> src(sub.own_count());
  for (std::size_t c = 0; c < src.size(); ++c)
    src[c] = drift.cell_alpha[c] * drift.cell_speed[c] * s.n_e.values[c];
  return src;
}

void advance_densities(const Subdomain &sub, StreamerState &s,
                       const DriftCoefficients &drift, const BoundarySpec &density_bc,
                       double dt, PhaseTimes *timers) {
  PhaseTimes scratch;
  PhaseTimes &t = timers ? *timers : scratch;
  Residuals rez;
  {
    ScopedTimer timer(t.convection);
    rez.convective =
        cell_sums(sub, convective_fluxes(sub, s.n_e, drift.velocity, density_bc));
  }
  {
    ScopedTimer timer(t.diffusion);
    const auto nodes = node_values(sub, s.n_e, density_bc);
    rez.diffusive = cell_sums(
        sub, diffusive_fluxes(sub, s.n_e, nodes, drift.diffusion, density_bc));
  }
  const auto src = ionization_source(sub, s, drift);
  s.n_e = explicit_step(sub, s.n_e, rez, dt, src);
  s.n_i.time += dt;
  for (std::size_t c = 0; c < sub.own_count(); ++c) s.n_i.values[c] += dt * src[c];
  for (auto *f : {&s.n_e, &s.n_i})
    for (std::size_t c = 0; c < sub.own_count(); ++c)
      if (f->values[c] < 0.0) {
        f->values[c] = 0.0;
        ++s.clip_count;
      }
}

double total_charge(const Subdomain &sub, const StreamerState &s) {
  double q = 0.0;
  for (std::size_t c = 0; c < sub.own_count(); ++c)
    q += sub.cells[c].area * (s.n_i.values[c] - s.n_e.values[c]);
  return q;
}

double GaussianSeed::operator()(Vec2 p) const {
  const Vec2 d = p - center;
  return background + amplitude * std::exp(-dot(d, d) / (2.0 * sigma * sigma));
}

SerialStreamer::SerialStreamer(Mesh mesh, StreamerCoefficients coeffs,
                               BoundarySpec potential_bc, BoundarySpec density_bc,
                               PoissonOptions poisson)
    : mesh_(std::move(mesh)), coeffs_(std::move(coeffs)),
      potential_bc_(std::move(potential_bc)), density_bc_(std::move(density_bc)),
      poisson_(poisson) {
  diamonds_ = build_diamonds(mesh_);
  const auto weights = node_weights(mesh_);
  PartitionMap pm;
  pm.part.assign(mesh_.cell_count(), 0);
  sub_ = std::move(build_subdomains(mesh_, pm, diamonds_, weights).front());
  lu_ = factorize(assemble_matrix(mesh_, diamonds_, weights, potential_bc_, poisson_));
  const std::size_t n = sub_.local_count();
  state_.n_e.values.assign(n, 0.0);
  state_.n_i.values.assign(n, 0.0);
  state_.potential.values.assign(n, 0.0);
}

void SerialStreamer::seed(const GaussianSeed &electrons, const GaussianSeed &ions) {
  for (std::size_t c = 0; c < sub_.local_count(); ++c) {
    state_.n_e.values[c] = electrons(sub_.cells[c].centroid);
    state_.n_i.values[c] = ions(sub_.cells[c].centroid);
  }
}

void SerialStreamer::solve_potential() {
  const auto f = poisson_source(sub_, state_, coeffs_);
  const auto b = assemble_rhs(mesh_, diamonds_, f, potential_bc_, poisson_,
                              state_.potential.time);
  state_.potential.values = solve(lu_, b, ws_);
  update_electric_field(sub_, state_, potential_bc_);
}

double SerialStreamer::stable_step(double cfl) {
  solve_potential();
  const auto drift = drift_coefficients(sub_, state_, coeffs_);
  return stable_dt(sub_, drift.velocity, drift.diffusion, cfl);
}

void SerialStreamer::step(double dt) {
  solve_potential();
  const auto drift = drift_coefficients(sub_, state_, coeffs_);
  advance_densities(sub_, state_, drift, density_bc_, dt);
  state_.potential.time += dt;
}

} // namespace trifv
