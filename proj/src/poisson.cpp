#include "trifv/poisson.hpp"

#include <algorithm>
#include <optional>

#include "trifv/direct_solver.hpp"
#include "trifv/errors.hpp"

namespace trifv {

namespace {

// Flux coefficients of one face: flux = c_across (P_R - P_L)
//                                     + c_along (P_A - P_B).
struct FaceCoefficients {
  double across;
  double along;
};

FaceCoefficients face_coefficients(const Face &f, const DiamondCell &d) {
  const double mes = 2.0 * d.area;
  return {f.length * f.length / mes,
          d.lr_length * dot(d.lr_normal, f.normal) * f.length / mes};
}

/// Nodes whose value is fixed by Dirichlet data.
std::vector<bool> dirichlet_nodes(const Mesh &mesh, const BoundarySpec &bc) {
  const auto labels = boundary_node_labels(mesh);
  std::vector<bool> out(mesh.node_count(), false);
  for (std::size_t v = 0; v < out.size(); ++v)
    for (const auto &l : labels[v]) out[v] = out[v] || bc.at(l).kind == BoundaryKind::dirichlet;
  return out;
}

bool any_dirichlet(const Mesh &mesh, const BoundarySpec &bc) {
  return std::any_of(mesh.faces().begin(), mesh.faces().end(), [&](const Face &f) {
    return f.is_boundary() && bc.at(f.label).kind == BoundaryKind::dirichlet;
  });
}

} // namespace

CsrMatrix assemble_matrix(const Mesh &mesh, const std::vector<DiamondCell> &diamonds,
                          const std::vector<NodeWeights> &weights,
                          const BoundarySpec &bc, const PoissonOptions &opt) {
  if (!opt.pinned_cell && !any_dirichlet(mesh, bc))
    throw SingularSystem("pure Neumann Poisson problem needs a pinned cell");
  if (opt.pinned_cell && *opt.pinned_cell >= mesh.cell_count())
    throw SingularSystem("pinned cell out of range");

  const std::size_t n = mesh.cell_count();
  std::vector<Triplet> t;
  t.reserve(n * 24);

  // Full vertex-neighbour pattern first, so it stays symmetric even where
  // coefficients cancel.
  for (std::size_t c = 0; c < n; ++c)
    for (auto v : mesh.triangles()[c])
      for (auto d : mesh.node_cells()[v]) t.push_back({c, d, 0.0});

  const auto fixed = dirichlet_nodes(mesh, bc);
  const std::size_t pinned = opt.pinned_cell.value_or(n);
  auto add = [&](std::size_t row, std::size_t col, double v) {
    if (row != pinned) t.push_back({row, col, v});
  };

  for (std::size_t fi = 0; fi < mesh.face_count(); ++fi) {
    const Face &f = mesh.faces()[fi];
    if (f.is_boundary() && bc.at(f.label).kind != BoundaryKind::dirichlet) continue;
    const auto [across, along] = face_coefficients(f, diamonds[fi]);
    const std::size_t l = f.left_cell, r = f.right_cell;

    // Row l gets -flux, row r gets +flux.
    add(l, l, across);
    if (!f.is_boundary()) {
      add(l, r, -across);
      add(r, r, across);
      add(r, l, -across);
    }
    if (!fixed[f.node_a])
      for (const auto &c : weights[f.node_a].contributors) {
        add(l, c.index, -along * c.weight);
        if (!f.is_boundary()) add(r, c.index, along * c.weight);
      }
    if (!fixed[f.node_b])
      for (const auto &c : weights[f.node_b].contributors) {
        add(l, c.index, along * c.weight);
        if (!f.is_boundary()) add(r, c.index, -along * c.weight);
      }
  }
  if (opt.pinned_cell) t.push_back({pinned, pinned, 1.0});
  ++solver_counters().assemblies;
  return CsrMatrix::from_triplets(n, std::move(t));
}

std::vector<double> assemble_rhs(const Mesh &mesh, const std::vector<DiamondCell> &diamonds,
                                 std::span<const double> source, const BoundarySpec &bc,
                                 const PoissonOptions &opt, double time) {
  const std::size_t n = mesh.cell_count();
  if (source.size() != n)
    throw DimensionMismatch("source has length " + std::to_string(source.size()) +
                            ", expected " + std::to_string(n));
  std::vector<double> b(n);
  for (std::size_t c = 0; c < n; ++c) b[c] = mesh.cells()[c].area * source[c];
  const auto labels = boundary_node_labels(mesh);
  std::vector<std::optional<double>> node_value(mesh.node_count());
  for (std::size_t v = 0; v < node_value.size(); ++v)
    if (!labels[v].empty())
      node_value[v] = dirichlet_node_value(bc, labels[v], mesh.nodes()[v], time);

  for (std::size_t fi = 0; fi < mesh.face_count(); ++fi) {
    const Face &f = mesh.faces()[fi];
    const bool dirichlet_face = f.is_boundary() && bc.at(f.label).kind == BoundaryKind::dirichlet;
    if (f.is_boundary() && !dirichlet_face) continue;
    const auto [across, along] = face_coefficients(f, diamonds[fi]);
    if (dirichlet_face) b[f.left_cell] += across * bc.at(f.label).value(f.midpoint, time);
    // Known node values move to the right-hand side.
    double lift = 0.0;
    if (node_value[f.node_a]) lift += along * *node_value[f.node_a];
    if (node_value[f.node_b]) lift -= along * *node_value[f.node_b];
    b[f.left_cell] += lift;
    if (!f.is_boundary()) b[f.right_cell] -= lift;
  }
  if (opt.pinned_cell) b[*opt.pinned_cell] = opt.pinned_value;
  return b;
}

} // namespace trifv
