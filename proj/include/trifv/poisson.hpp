#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "trifv/boundary.hpp"
#include "trifv/mesh.hpp"
#include "trifv/sparse.hpp"

namespace trifv {

struct PoissonOptions {
  /// Required when no boundary is Dirichlet: this cell's row becomes the
  /// identity row, fixing the additive constant.
  std::optional<std::size_t> pinned_cell;
  double pinned_value = 0.0;
};

/// Discrete -Laplacian on cell unknowns. Row i holds -sum_faces
/// (grad P . n)|sigma| with the diamond gradient, node values expanded
/// through the node weights. Dirichlet faces use P = g(midpoint) and nodes
/// on a Dirichlet boundary take g at the node; both go to the right-hand
/// side. Neumann and wall faces carry no flux.
///
/// The pattern is "shares a vertex", stored with explicit zeros where
/// coefficients cancel, so it is structurally symmetric. Throws
/// SingularSystem for a pure Neumann problem without a pinned cell.
CsrMatrix assemble_matrix(const Mesh &mesh, const std::vector<DiamondCell> &diamonds,
                          const std::vector<NodeWeights> &weights,
                          const BoundarySpec &bc, const PoissonOptions &opt = {});

/// b_i = mu_i f_i plus Dirichlet lift terms, for -Laplace(P) = f.
std::vector<double> assemble_rhs(const Mesh &mesh, const std::vector<DiamondCell> &diamonds,
                                 std::span<const double> source, const BoundarySpec &bc,
                                 const PoissonOptions &opt = {}, double time = 0.0);

} // namespace trifv
