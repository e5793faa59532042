#include "trifv/transport.hpp"

#include <algorithm>
#include <cmath>

#include "trifv/errors.hpp"

namespace trifv {

std::string_view quantity_name(Quantity q) {
  switch (q) {
  case Quantity::u: return "u";
  case Quantity::n_e: return "n_e";
  case Quantity::n_i: return "n_i";
  case Quantity::potential: return "potential";
  }
  return "unknown";
}

double far_side_value(const Subdomain &sub, const Field &u, std::size_t face,
                      const BoundarySpec &bc) {
  const LocalFace &f = sub.faces[face];
  if (!f.is_boundary()) return u.values[f.right];
  const BoundaryCondition &c = bc.at(f.label);
  if (c.kind == BoundaryKind::dirichlet) return c.value(f.midpoint, u.time);
  return u.values[f.left];
}

double upwind_face_value(const Subdomain &sub, const Field &u, Vec2 velocity,
                         std::size_t face, const BoundarySpec &bc) {
  const LocalFace &f = sub.faces[face];
  if (dot(velocity, f.normal) >= 0.0) return u.values[f.left];
  // Inner faces read u_j, halo faces the exchanged u_h; both live in the
  // same local array.
  return far_side_value(sub, u, face, bc);
}

std::vector<double> node_values(const Subdomain &sub, const Field &u) {
  std::vector<double> out(sub.nodes.size(), 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    double acc = 0.0;
    for (const auto &c : sub.node_weights[n]) acc += c.weight * u.values[c.cell];
    out[n] = acc;
  }
  return out;
}

std::vector<double> node_values(const Subdomain &sub, const Field &u, const BoundarySpec &bc) {
  auto out = node_values(sub, u);
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (sub.node_labels[n].empty() || sub.node_weights[n].empty()) continue;
    if (auto g = dirichlet_node_value(bc, sub.node_labels[n], sub.nodes[n], u.time)) out[n] = *g;
  }
  return out;
}

Vec2 face_gradient(const Subdomain &sub, const Field &u,
                   std::span<const double> u_node, std::size_t face,
                   const BoundarySpec &bc) {
  const LocalFace &f = sub.faces[face];
  if (f.is_boundary() && bc.at(f.label).kind != BoundaryKind::dirichlet) {
    // Zero normal derivative: only the tangential part along the edge.
    const Vec2 ab = sub.nodes[f.node_a] - sub.nodes[f.node_b];
    const double s = (u_node[f.node_a] - u_node[f.node_b]) / dot(ab, ab);
    return {s * ab.x, s * ab.y};
  }
  const double ul = u.values[f.left];
  const double ur = far_side_value(sub, u, face, bc);
  const double across = (ur - ul) * f.length;
  const double along = (u_node[f.node_a] - u_node[f.node_b]) * f.lr_length;
  const double mes = 2.0 * f.diamond_area;
  return {(across * f.normal.x + along * f.lr_normal.x) / mes,
          (across * f.normal.y + along * f.lr_normal.y) / mes};
}

std::vector<Vec2> face_gradients(const Subdomain &sub, const Field &u,
                                 std::span<const double> u_node,
                                 const BoundarySpec &bc) {
  std::vector<Vec2> out(sub.faces.size());
  for (std::size_t f = 0; f < out.size(); ++f)
    out[f] = face_gradient(sub, u, u_node, f, bc);
  return out;
}

std::vector<double> convective_fluxes(const Subdomain &sub, const Field &u,
                                      std::span<const Vec2> velocity,
                                      const BoundarySpec &bc) {
  std::vector<double> out(sub.faces.size(), 0.0);
  for (std::size_t f = 0; f < out.size(); ++f) {
    const LocalFace &lf = sub.faces[f];
    if (lf.is_boundary() && bc.at(lf.label).kind == BoundaryKind::wall) continue;
    const double vn = dot(velocity[f], lf.normal);
    const double uk = vn >= 0.0 ? u.values[lf.left] : far_side_value(sub, u, f, bc);
    out[f] = uk * vn * lf.length;
  }
  return out;
}

std::vector<double> diffusive_fluxes(const Subdomain &sub, const Field &u,
                                     std::span<const double> u_node,
                                     std::span<const double> diffusion,
                                     const BoundarySpec &bc) {
  std::vector<double> out(sub.faces.size(), 0.0);
  for (std::size_t f = 0; f < out.size(); ++f) {
    const LocalFace &lf = sub.faces[f];
    if (lf.is_boundary() && bc.at(lf.label).kind != BoundaryKind::dirichlet) continue;
    const Vec2 g = face_gradient(sub, u, u_node, f, bc);
    out[f] = diffusion[f] * dot(g, lf.normal) * lf.length;
  }
  return out;
}

std::vector<double> cell_sums(const Subdomain &sub, std::span<const double> flux) {
  std::vector<double> out(sub.own_count(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    double acc = 0.0;
    for (auto f : sub.cell_faces[c]) acc += sub.face_sign(f, c) * flux[f];
    out[c] = acc;
  }
  return out;
}

Residuals residuals(const Subdomain &sub, const Field &u,
                    std::span<const Vec2> velocity,
                    std::span<const double> diffusion, const BoundarySpec &bc) {
  Residuals r;
  r.convective = cell_sums(sub, convective_fluxes(sub, u, velocity, bc));
  const auto un = node_values(sub, u, bc);
  r.diffusive = cell_sums(sub, diffusive_fluxes(sub, u, un, diffusion, bc));
  return r;
}

Field explicit_step(const Subdomain &sub, const Field &u, const Residuals &rez,
                    double dt, std::span<const double> source) {
  Field next = u;
  next.time = u.time + dt;
  for (std::size_t c = 0; c < sub.own_count(); ++c) {
    const double mu = sub.cells[c].area;
    double v = u.values[c] - dt / mu * rez.convective[c] + dt / mu * rez.diffusive[c];
    if (!source.empty()) v += dt * source[c];
    next.values[c] = v;
  }
  return next;
}

double stable_dt(const Subdomain &sub, std::span<const Vec2> velocity,
                 std::span<const double> diffusion, double cfl) {
  double dt = steady_dt;
  for (std::size_t c = 0; c < sub.own_count(); ++c) {
    const double mu = sub.cells[c].area;
    double rate = 0.0;
    for (auto f : sub.cell_faces[c]) {
      const LocalFace &lf = sub.faces[f];
      rate += std::abs(dot(velocity[f], lf.normal)) * lf.length +
              2.0 * diffusion[f] * lf.length * lf.length / mu;
    }
    if (rate == 0.0) continue;
    const double local = cfl * mu / rate;
    if (!(local > 0.0)) throw ZeroDt(sub.own_cells[c]);
    dt = std::min(dt, local);
  }
  return dt;
}

double stable_dt(const Subdomain &sub, std::span<const Vec2> velocity,
                 double diffusion, double cfl) {
  const std::vector<double> d(sub.faces.size(), diffusion);
  return stable_dt(sub, velocity, d, cfl);
}

double total_mass(const Subdomain &sub, const Field &u) {
  double m = 0.0;
  for (std::size_t c = 0; c < sub.own_count(); ++c) m += sub.cells[c].area * u.values[c];
  return m;
}

} // namespace trifv
