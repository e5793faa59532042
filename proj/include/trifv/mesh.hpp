#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "trifv/geometry.hpp"

namespace trifv {

inline constexpr std::size_t no_cell = std::numeric_limits<std::size_t>::max();

using Triangle = std::array<std::size_t, 3>;

/// Edge between two cells (or a cell and the domain boundary).
///
/// node_a -> node_b runs counterclockwise around left_cell, so `normal`
/// is the outward unit normal of left_cell and points into right_cell.
struct Face {
  std::size_t node_a = 0;
  std::size_t node_b = 0;
  std::size_t left_cell = 0;
  std::size_t right_cell = no_cell;
  Vec2 normal;
  double length = 0.0;
  Vec2 midpoint;
  std::string label; // empty for interior faces

  bool is_boundary() const noexcept { return right_cell == no_cell; }
};

struct CellGeometry {
  double area = 0.0;
  Vec2 centroid;
};

/// Explicit boundary label for one boundary edge, as read from a mesh file.
struct BoundaryEdge {
  std::size_t node_a = 0;
  std::size_t node_b = 0;
  std::string label;
};

/// Immutable 2D triangular mesh with face connectivity and cell geometry.
class Mesh {
public:
  Mesh() = default;

  /// Validates the triangulation and builds faces. Boundary edges missing
  /// from `labels` are tagged "default".
  ///
  /// Throws TopologyError on non-positive areas, edges shared by more than
  /// two triangles, inconsistent orientation, dangling nodes, or labels on
  /// edges that are not boundary edges.
  Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
       std::span<const BoundaryEdge> labels = {});

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t cell_count() const noexcept { return triangles_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }

  const std::vector<Vec2> &nodes() const noexcept { return nodes_; }
  const std::vector<Triangle> &triangles() const noexcept { return triangles_; }
  const std::vector<Face> &faces() const noexcept { return faces_; }
  /// Face ids of each cell, in edge order (v0v1, v1v2, v2v0).
  const std::vector<std::array<std::size_t, 3>> &cell_faces() const noexcept {
    return cell_faces_;
  }
  const std::vector<CellGeometry> &cells() const noexcept { return cells_; }
  /// Cells incident to each node, ascending.
  const std::vector<std::vector<std::size_t>> &node_cells() const noexcept {
    return node_cells_;
  }

  std::size_t interior_face_count() const noexcept;
  double mean_cell_area() const noexcept;

private:
  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<Face> faces_;
  std::vector<std::array<std::size_t, 3>> cell_faces_;
  std::vector<CellGeometry> cells_;
  std::vector<std::vector<std::size_t>> node_cells_;
};

/// Shoelace area and vertex-average centroid of every cell.
std::vector<CellGeometry> cell_geometry(const Mesh &mesh);

/// Diamond cell of a face: quadrilateral (L, A, R, B) for interior faces,
/// triangle (L, A, B) for boundary faces, where L and R are the centroids
/// of the left and right cells. For boundary faces R is the face midpoint.
struct DiamondCell {
  std::size_t face = 0;
  double area = 0.0;
  /// rot_cw(R - L) / |R - L|
  Vec2 lr_normal;
  /// |R - L|
  double lr_length = 0.0;
};

/// Throws DegenerateDiamond when an area falls below 1e-14 of the mean
/// cell area.
std::vector<DiamondCell> build_diamonds(const Mesh &mesh);

struct NodeContributor {
  std::size_t index = 0; // cell id, or position in the node's halo samples
  double weight = 0.0;
  bool halo = false;
};

/// Interpolation weights from surrounding cell centroids to one node.
struct NodeWeights {
  std::size_t node = 0;
  std::vector<NodeContributor> contributors; // cells ascending, then halo
  bool rank_deficient = false;
};

/// Least-squares vertex interpolation weights.
///
/// For each node, fits u(c) ~ a + g . (c - node) over the centroids of the
/// incident cells (plus optional extra halo samples) and returns the
/// weights producing a. They sum to one and reproduce affine fields
/// exactly. Collinear stencils fall back to inverse-distance weights and
/// set `rank_deficient`.
std::vector<NodeWeights>
node_weights(const Mesh &mesh,
             std::span<const std::vector<Vec2>> halo_samples = {});

/// Least-squares weights for an arbitrary stencil; exposed for reuse and
/// testing. Returns false when the stencil is rank deficient, in which case
/// `weights` holds the inverse-distance fallback.
bool least_squares_weights(Vec2 node, std::span<const Vec2> samples,
                           std::vector<double> &weights);

Mesh parse_mesh(std::istream &in);
Mesh load_mesh(const std::string &path);
void write_mesh(const Mesh &mesh, std::ostream &out);
void save_mesh(const Mesh &mesh, const std::string &path);

/// Distinct boundary labels meeting at each node, in face order; empty
/// for interior nodes.
std::vector<std::vector<std::string>> boundary_node_labels(const Mesh &mesh);

/// Structured triangulation of [0,1]^2 with n x n squares, each split by
/// its lower-left to upper-right diagonal. Boundary labels are left, right,
/// bottom and top.
Mesh structured_mesh(std::size_t n);

} // namespace trifv
