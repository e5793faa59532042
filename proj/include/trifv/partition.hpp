#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trifv/geometry.hpp"
#include "trifv/mesh.hpp"

namespace trifv {

/// Cell dual graph in CSR form: one vertex per triangle, one unit-weight
/// edge per interior face. Neighbour lists are ascending.
struct DualGraph {
  std::vector<std::size_t> xadj;
  std::vector<std::size_t> adjncy;

  std::size_t vertex_count() const noexcept {
    return xadj.empty() ? 0 : xadj.size() - 1;
  }
  std::size_t edge_count() const noexcept { return adjncy.size() / 2; }
  std::size_t degree(std::size_t v) const noexcept {
    return xadj[v + 1] - xadj[v];
  }
};

DualGraph build_dual_graph(const Mesh &mesh);

struct PartitionMap {
  std::vector<int> part; // rank per cell
  int k = 1;
};

/// Recursive bisection: each half is grown greedily from a
/// pseudo-peripheral vertex, taking the frontier vertex with the most
/// connections into the growing half. Boundary refinement passes then move
/// single vertices to reduce the edge cut while keeping every part within
/// 10% of the mean size.
///
/// Deterministic in (graph, k, seed). Throws InvalidK unless
/// 1 <= k <= vertex count.
PartitionMap partition(const DualGraph &graph, int k, std::uint64_t seed = 0);

struct PartitionMetrics {
  std::size_t edge_cut = 0;
  double imbalance = 1.0; // max part size / mean part size
  std::size_t halo_total = 0;
};

PartitionMetrics partition_metrics(const DualGraph &graph, const PartitionMap &pm);

/// Exchange link with one neighbouring rank. `send` lists local own cells
/// whose values the neighbour needs; `recv` lists the local halo slots the
/// neighbour fills, and `remote` the neighbour's local index of each
/// received cell. Both sides order entries by global cell id.
struct NeighborLink {
  int rank = 0;
  std::vector<std::size_t> send;
  std::vector<std::size_t> recv;
  std::vector<std::size_t> remote;
};

/// Face of a subdomain. Faces on a part boundary keep the own cell on the
/// left; `flipped` records that the global face was reversed to do so.
struct LocalFace {
  std::size_t node_a = 0; // local node ids, CCW around `left`
  std::size_t node_b = 0;
  std::size_t left = 0;   // local cell (always an own cell)
  std::size_t right = no_cell;
  Vec2 normal;
  double length = 0.0;
  Vec2 midpoint;
  std::string label;
  double diamond_area = 0.0;
  Vec2 lr_normal;
  double lr_length = 0.0;
  std::size_t global_face = 0;
  bool flipped = false;

  bool is_boundary() const noexcept { return right == no_cell; }
};

struct LocalContributor {
  std::size_t cell = 0; // local cell index
  double weight = 0.0;
};

/// One rank's slice of the mesh: own cells first, then halo cells (every
/// off-rank cell sharing a vertex with an own cell, which includes the
/// face-adjacent layer). Carries everything the transport kernels need
/// without touching global arrays.
struct Subdomain {
  int rank = 0;
  std::vector<std::size_t> own_cells;  // global ids, ascending
  std::vector<std::size_t> halo_cells; // global ids, ascending

  std::vector<Vec2> nodes;
  std::vector<std::size_t> node_l2g;
  std::vector<Triangle> triangles; // local node ids, own then halo
  std::vector<CellGeometry> cells;
  std::vector<std::size_t> cell_l2g;
  std::vector<std::size_t> cell_g2l; // sized to global cell count, no_cell if absent

  std::vector<LocalFace> faces;                          // faces of own cells
  std::vector<std::array<std::size_t, 3>> cell_faces;    // per own cell, global edge order
  std::vector<std::vector<LocalContributor>> node_weights; // per local node (own-cell nodes only)
  std::vector<std::vector<std::string>> node_labels;       // boundary labels per local node

  std::vector<NeighborLink> links; // ascending neighbour rank

  std::size_t own_count() const noexcept { return own_cells.size(); }
  std::size_t local_count() const noexcept { return cell_l2g.size(); }
  bool is_halo_face(std::size_t f) const noexcept {
    return !faces[f].is_boundary() && faces[f].right >= own_count();
  }
  /// +1 if `cell` is the left cell of face f, -1 otherwise.
  double face_sign(std::size_t f, std::size_t cell) const noexcept {
    return faces[f].left == cell ? 1.0 : -1.0;
  }
};

std::vector<Subdomain> build_subdomains(const Mesh &mesh, const PartitionMap &pm,
                                        const std::vector<DiamondCell> &diamonds,
                                        const std::vector<NodeWeights> &weights);

/// Convenience overload computing diamonds and node weights first.
std::vector<Subdomain> build_subdomains(const Mesh &mesh, const PartitionMap &pm);

/// Single subdomain covering the whole mesh.
Subdomain whole_mesh_subdomain(const Mesh &mesh);

} // namespace trifv
