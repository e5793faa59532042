#include "trifv/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <utility>

#include "trifv/errors.hpp"

namespace trifv {

DualGraph build_dual_graph(const Mesh &mesh) {
  const std::size_t n = mesh.cell_count();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto &f : mesh.faces()) {
    if (f.is_boundary()) continue;
    adj[f.left_cell].push_back(f.right_cell);
    adj[f.right_cell].push_back(f.left_cell);
  }
  DualGraph g;
  g.xadj.reserve(n + 1);
  g.xadj.push_back(0);
  for (auto &a : adj) {
    std::sort(a.begin(), a.end());
    g.adjncy.insert(g.adjncy.end(), a.begin(), a.end());
    g.xadj.push_back(g.adjncy.size());
  }
  return g;
}

namespace {

constexpr std::size_t unreached = std::numeric_limits<std::size_t>::max();

// Heap entry: more connections first, then lowest vertex id.
struct Candidate {
  std::size_t conn;
  std::size_t vertex;
  bool operator<(const Candidate &o) const {
    if (conn != o.conn) return conn < o.conn;
    return vertex > o.vertex;
  }
};

/// Splits the vertices of one part into two parts of prescribed sizes.
class Bisector {
public:
  Bisector(const DualGraph &g, std::vector<int> &part) : g_(g), part_(part) {
    dist_.assign(g.vertex_count(), unreached);
  }

  // Vertices of `members` (all labelled `from`) are split: the first
  // `take` grown vertices become `to`, the rest stay `from`.
  void split(const std::vector<std::size_t> &members, int from, int to, std::size_t take,
             std::uint64_t seed) {
    const std::size_t start = peripheral(members, from, members[seed % members.size()]);
    std::priority_queue<Candidate> heap;
    std::size_t grown = 0;
    std::size_t next_member = 0;
    auto add = [&](std::size_t v) {
      part_[v] = to;
      ++grown;
      for (std::size_t q = g_.xadj[v]; q < g_.xadj[v + 1]; ++q) {
        const std::size_t w = g_.adjncy[q];
        if (part_[w] == from) heap.push({connections(w, to), w});
      }
    };
    add(start);
    while (grown < take) {
      bool placed = false;
      while (!heap.empty()) {
        const Candidate c = heap.top();
        heap.pop();
        if (part_[c.vertex] != from) continue;
        const std::size_t now = connections(c.vertex, to);
        if (now != c.conn) {
          heap.push({now, c.vertex});
          continue;
        }
        add(c.vertex);
        placed = true;
        break;
      }
      if (placed) continue;
      // Disconnected remainder: restart from the lowest remaining member.
      while (part_[members[next_member]] != from) ++next_member;
      add(members[next_member]);
    }
  }

private:
  std::size_t connections(std::size_t v, int p) const {
    std::size_t c = 0;
    for (std::size_t q = g_.xadj[v]; q < g_.xadj[v + 1]; ++q)
      if (part_[g_.adjncy[q]] == p) ++c;
    return c;
  }

  // BFS restricted to one part; returns the last vertex reached (lowest id
  // among the farthest).
  std::size_t farthest_from(const std::vector<std::size_t> &members, int p, std::size_t src) {
    for (auto v : members) dist_[v] = unreached;
    std::deque<std::size_t> q{src};
    dist_[src] = 0;
    std::size_t best = src;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop_front();
      if (dist_[v] > dist_[best] || (dist_[v] == dist_[best] && v < best)) best = v;
      for (std::size_t e = g_.xadj[v]; e < g_.xadj[v + 1]; ++e) {
        const std::size_t w = g_.adjncy[e];
        if (part_[w] == p && dist_[w] == unreached) {
          dist_[w] = dist_[v] + 1;
          q.push_back(w);
        }
      }
    }
    return best;
  }

  std::size_t peripheral(const std::vector<std::size_t> &members, int p, std::size_t src) {
    return farthest_from(members, p, farthest_from(members, p, src));
  }

  const DualGraph &g_;
  std::vector<int> &part_;
  std::vector<std::size_t> dist_;
};

} // namespace

PartitionMap partition(const DualGraph &graph, int k, std::uint64_t seed) {
  const std::size_t n = graph.vertex_count();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw InvalidK("k = " + std::to_string(k) + " must lie in [1, " +
                   std::to_string(n) + "]");

  PartitionMap pm;
  pm.k = k;
  pm.part.assign(n, 0);
  if (k == 1) return pm;
  const auto kk = static_cast<std::size_t>(k);

  // Recursive bisection: part `lo` covering parts [lo, lo + count) is
  // split into [lo, lo + count/2) and the rest, sizes proportional to the
  // part counts.
  Bisector bisect(graph, pm.part);
  struct Range {
    int lo;
    int count;
  };
  std::vector<Range> stack{{0, k}};
  while (!stack.empty()) {
    const Range r = stack.back();
    stack.pop_back();
    if (r.count == 1) continue;
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < n; ++v)
      if (pm.part[v] == r.lo) members.push_back(v);
    const int upper = r.count - r.count / 2;
    const int hi = r.lo + r.count / 2;
    const std::size_t take = members.size() * static_cast<std::size_t>(upper) /
                             static_cast<std::size_t>(r.count);
    bisect.split(members, r.lo, hi, take, seed);
    stack.push_back({hi, upper});
    stack.push_back({r.lo, r.count / 2});
  }

  std::vector<std::size_t> size(kk, 0);
  for (int p : pm.part) ++size[static_cast<std::size_t>(p)];
  const std::size_t cap = (n + kk - 1) / kk;

  // Boundary refinement. A move must either cut fewer edges, or keep the
  // cut and narrow the size gap; parts never exceed the balance ceiling or
  // become empty.
  const double mean = static_cast<double>(n) / static_cast<double>(kk);
  const auto ceiling =
      std::max(cap, static_cast<std::size_t>(std::floor(1.10 * mean)));
  std::vector<std::size_t> conn(kk, 0);
  for (int pass = 0; pass < 20; ++pass) {
    bool moved = false;
    for (std::size_t v = 0; v < n; ++v) {
      const int a = pm.part[v];
      const auto ua = static_cast<std::size_t>(a);
      if (size[ua] <= 1) continue;
      bool boundary = false;
      for (std::size_t q = graph.xadj[v]; q < graph.xadj[v + 1]; ++q) {
        const int p = pm.part[graph.adjncy[q]];
        ++conn[static_cast<std::size_t>(p)];
        boundary |= p != a;
      }
      if (boundary) {
        int best = -1;
        long best_gain = 0;
        for (std::size_t q = graph.xadj[v]; q < graph.xadj[v + 1]; ++q) {
          const int b = pm.part[graph.adjncy[q]];
          const auto ub = static_cast<std::size_t>(b);
          if (b == a || size[ub] + 1 > ceiling) continue;
          const long gain =
              static_cast<long>(conn[ub]) - static_cast<long>(conn[ua]);
          const bool acceptable = gain > 0 || (gain == 0 && size[ua] > size[ub] + 1);
          if (!acceptable) continue;
          if (best < 0 || gain > best_gain || (gain == best_gain && b < best)) {
            best = b;
            best_gain = gain;
          }
        }
        if (best >= 0) {
          pm.part[v] = best;
          --size[ua];
          ++size[static_cast<std::size_t>(best)];
          moved = true;
        }
      }
      for (std::size_t q = graph.xadj[v]; q < graph.xadj[v + 1]; ++q)
        conn[static_cast<std::size_t>(pm.part[graph.adjncy[q]])] = 0;
      conn[ua] = 0;
    }
    if (!moved) break;
  }
  return pm;
}

PartitionMetrics partition_metrics(const DualGraph &graph, const PartitionMap &pm) {
  PartitionMetrics m;
  const std::size_t n = graph.vertex_count();
  std::vector<std::size_t> size(static_cast<std::size_t>(pm.k), 0);
  for (std::size_t v = 0; v < n; ++v) ++size[static_cast<std::size_t>(pm.part[v])];
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t q = graph.xadj[v]; q < graph.xadj[v + 1]; ++q) {
      const std::size_t w = graph.adjncy[q];
      if (v < w && pm.part[v] != pm.part[w]) ++m.edge_cut;
    }
  const double mean = static_cast<double>(n) / static_cast<double>(pm.k);
  m.imbalance = static_cast<double>(*std::max_element(size.begin(), size.end())) / mean;

  // Distinct off-rank neighbours per rank.
  std::vector<int> seen_by(n, -1);
  for (int r = 0; r < pm.k; ++r)
    for (std::size_t v = 0; v < n; ++v) {
      if (pm.part[v] != r) continue;
      for (std::size_t q = graph.xadj[v]; q < graph.xadj[v + 1]; ++q) {
        const std::size_t w = graph.adjncy[q];
        if (pm.part[w] != r && seen_by[w] != r) {
          seen_by[w] = r;
          ++m.halo_total;
        }
      }
    }
  return m;
}

std::vector<Subdomain> build_subdomains(const Mesh &mesh, const PartitionMap &pm,
                                        const std::vector<DiamondCell> &diamonds,
                                        const std::vector<NodeWeights> &weights) {
  const std::size_t n_cells = mesh.cell_count();
  const auto kk = static_cast<std::size_t>(pm.k);
  const auto node_labels = boundary_node_labels(mesh);
  std::vector<std::vector<std::size_t>> owned(kk);
  std::vector<std::size_t> owner_pos(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    auto &list = owned[static_cast<std::size_t>(pm.part[c])];
    owner_pos[c] = list.size();
    list.push_back(c);
  }

  // Cells sharing a vertex with c, excluding c, ascending.
  auto vertex_neighbors = [&](std::size_t c, std::vector<std::size_t> &out) {
    out.clear();
    for (auto v : mesh.triangles()[c])
      for (auto d : mesh.node_cells()[v])
        if (d != c) out.push_back(d);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  };

  std::vector<Subdomain> subs(kk);
  std::vector<std::size_t> nbr;
  for (std::size_t r = 0; r < kk; ++r) {
    Subdomain &s = subs[r];
    s.rank = static_cast<int>(r);
    s.own_cells = owned[r];

    for (auto c : s.own_cells) {
      vertex_neighbors(c, nbr);
      for (auto d : nbr)
        if (static_cast<std::size_t>(pm.part[d]) != r) s.halo_cells.push_back(d);
    }
    std::sort(s.halo_cells.begin(), s.halo_cells.end());
    s.halo_cells.erase(std::unique(s.halo_cells.begin(), s.halo_cells.end()),
                       s.halo_cells.end());

    s.cell_l2g = s.own_cells;
    s.cell_l2g.insert(s.cell_l2g.end(), s.halo_cells.begin(), s.halo_cells.end());
    s.cell_g2l.assign(n_cells, no_cell);
    for (std::size_t l = 0; l < s.cell_l2g.size(); ++l) s.cell_g2l[s.cell_l2g[l]] = l;

    for (auto c : s.cell_l2g)
      for (auto v : mesh.triangles()[c]) s.node_l2g.push_back(v);
    std::sort(s.node_l2g.begin(), s.node_l2g.end());
    s.node_l2g.erase(std::unique(s.node_l2g.begin(), s.node_l2g.end()),
                     s.node_l2g.end());
    std::vector<std::size_t> node_g2l(mesh.node_count(), no_cell);
    for (std::size_t l = 0; l < s.node_l2g.size(); ++l) {
      node_g2l[s.node_l2g[l]] = l;
      s.nodes.push_back(mesh.nodes()[s.node_l2g[l]]);
    }

    for (auto c : s.cell_l2g) {
      const auto &t = mesh.triangles()[c];
      s.triangles.push_back({node_g2l[t[0]], node_g2l[t[1]], node_g2l[t[2]]});
      s.cells.push_back(mesh.cells()[c]);
    }

    std::vector<std::size_t> face_g2l(mesh.face_count(), no_cell);
    for (std::size_t lc = 0; lc < s.own_count(); ++lc) {
      const std::size_t gc = s.own_cells[lc];
      std::array<std::size_t, 3> local_ids{};
      for (std::size_t e = 0; e < 3; ++e) {
        const std::size_t gf = mesh.cell_faces()[gc][e];
        if (face_g2l[gf] != no_cell) {
          local_ids[e] = face_g2l[gf];
          continue;
        }
        const Face &f = mesh.faces()[gf];
        const DiamondCell &d = diamonds[gf];
        LocalFace lf;
        lf.global_face = gf;
        lf.length = f.length;
        lf.midpoint = f.midpoint;
        lf.label = f.label;
        lf.diamond_area = d.area;
        lf.lr_length = d.lr_length;
        const bool left_owned = static_cast<std::size_t>(pm.part[f.left_cell]) == r;
        if (left_owned) {
          lf.node_a = node_g2l[f.node_a];
          lf.node_b = node_g2l[f.node_b];
          lf.left = s.cell_g2l[f.left_cell];
          lf.right = f.is_boundary() ? no_cell : s.cell_g2l[f.right_cell];
          lf.normal = f.normal;
          lf.lr_normal = d.lr_normal;
        } else {
          lf.flipped = true;
          lf.node_a = node_g2l[f.node_b];
          lf.node_b = node_g2l[f.node_a];
          lf.left = s.cell_g2l[f.right_cell];
          lf.right = s.cell_g2l[f.left_cell];
          lf.normal = -f.normal;
          lf.lr_normal = -d.lr_normal;
        }
        local_ids[e] = s.faces.size();
        face_g2l[gf] = s.faces.size();
        s.faces.push_back(std::move(lf));
      }
      s.cell_faces.push_back(local_ids);
    }

    s.node_labels.resize(s.nodes.size());
    for (std::size_t ln = 0; ln < s.nodes.size(); ++ln) s.node_labels[ln] = node_labels[s.node_l2g[ln]];

    s.node_weights.assign(s.nodes.size(), {});
    for (std::size_t lc = 0; lc < s.own_count(); ++lc)
      for (auto ln : s.triangles[lc]) {
        auto &dst = s.node_weights[ln];
        if (!dst.empty()) continue;
        for (const auto &c : weights[s.node_l2g[ln]].contributors) {
          // Global weights carry no halo samples; every incident cell of an
          // own-cell node is local by construction of the halo.
          dst.push_back({s.cell_g2l[c.index], c.weight});
        }
      }
  }

  // Exchange links. Neighbour s needs from r exactly the r-owned cells in
  // s's halo; both sides walk them in ascending global id.
  for (std::size_t r = 0; r < kk; ++r) {
    Subdomain &s = subs[r];
    std::vector<std::vector<std::size_t>> recv_by(kk);
    for (auto g : s.halo_cells) recv_by[static_cast<std::size_t>(pm.part[g])].push_back(g);
    for (std::size_t o = 0; o < kk; ++o) {
      if (recv_by[o].empty()) continue;
      NeighborLink link;
      link.rank = static_cast<int>(o);
      for (auto g : recv_by[o]) {
        link.recv.push_back(s.cell_g2l[g]);
        link.remote.push_back(owner_pos[g]);
      }
      for (auto g : subs[o].halo_cells)
        if (static_cast<std::size_t>(pm.part[g]) == r) link.send.push_back(s.cell_g2l[g]);
      s.links.push_back(std::move(link));
    }
  }
  return subs;
}

std::vector<Subdomain> build_subdomains(const Mesh &mesh, const PartitionMap &pm) {
  return build_subdomains(mesh, pm, build_diamonds(mesh), node_weights(mesh));
}

Subdomain whole_mesh_subdomain(const Mesh &mesh) {
  PartitionMap pm;
  pm.k = 1;
  pm.part.assign(mesh.cell_count(), 0);
  return std::move(build_subdomains(mesh, pm).front());
}

} // namespace trifv
