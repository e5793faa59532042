#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "support.hpp"
#include "trifv/errors.hpp"
#include "trifv/partition.hpp"

using namespace trifv;

namespace {

std::size_t recount_cut(const Mesh &m, const PartitionMap &pm) {
  std::size_t cut = 0;
  for (const auto &f : m.faces())
    if (!f.is_boundary() && pm.part[f.left_cell] != pm.part[f.right_cell]) ++cut;
  return cut;
}

PartitionMap random_partition(std::size_t n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, k - 1);
  PartitionMap pm;
  pm.k = k;
  pm.part.resize(n);
  for (auto &p : pm.part) p = pick(rng);
  return pm;
}

} // namespace

TEST(DualGraph, SmallMeshes) {
  const auto two = build_dual_graph(structured_mesh(1));
  EXPECT_EQ(two.vertex_count(), 2u);
  EXPECT_EQ(two.edge_count(), 1u);
  const auto one = build_dual_graph(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}));
  EXPECT_EQ(one.vertex_count(), 1u);
  EXPECT_EQ(one.edge_count(), 0u);
}

TEST(DualGraph, StructuredMeshEdgesAreInteriorFaces) {
  const auto m = structured_mesh(8);
  const auto g = build_dual_graph(m);
  EXPECT_EQ(g.vertex_count(), 128u);
  EXPECT_EQ(g.edge_count(), m.interior_face_count());
  EXPECT_EQ(g.edge_count(), 176u);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    EXPECT_LE(g.degree(v), 3u);
    for (std::size_t q = g.xadj[v]; q < g.xadj[v + 1]; ++q) {
      const auto w = g.adjncy[q];
      EXPECT_TRUE(std::binary_search(g.adjncy.begin() + g.xadj[w],
                                     g.adjncy.begin() + g.xadj[w + 1], v));
    }
  }
}

TEST(Partition, SinglePart) {
  const auto g = build_dual_graph(structured_mesh(4));
  const auto pm = partition(g, 1);
  EXPECT_TRUE(std::all_of(pm.part.begin(), pm.part.end(), [](int p) { return p == 0; }));
  const auto m = partition_metrics(g, pm);
  EXPECT_EQ(m.edge_cut, 0u);
  EXPECT_DOUBLE_EQ(m.imbalance, 1.0);
  EXPECT_EQ(m.halo_total, 0u);
}

TEST(Partition, OnePartPerCell) {
  const auto g = build_dual_graph(structured_mesh(3));
  const int n = static_cast<int>(g.vertex_count());
  const auto pm = partition(g, n);
  std::set<int> parts(pm.part.begin(), pm.part.end());
  EXPECT_EQ(parts.size(), g.vertex_count());
  EXPECT_EQ(partition_metrics(g, pm).edge_cut, g.edge_count());
}

TEST(Partition, InvalidK) {
  const auto g = build_dual_graph(structured_mesh(2));
  EXPECT_THROW(partition(g, 0), InvalidK);
  EXPECT_THROW(partition(g, 9), InvalidK);
  EXPECT_THROW(partition(g, -3), InvalidK);
}

TEST(Partition, BalancedAndBetterThanRandom) {
  for (std::size_t n : {16u, 32u})
    for (int k : {2, 3, 4, 5, 8}) {
      const auto mesh = structured_mesh(n);
      const auto g = build_dual_graph(mesh);
      const auto pm = partition(g, k, 0);
      const auto metrics = partition_metrics(g, pm);
      EXPECT_LE(metrics.imbalance, 1.10) << n << " " << k;
      std::size_t best_random = g.edge_count();
      for (std::uint64_t s = 0; s < 100; ++s)
        best_random = std::min(best_random,
                               recount_cut(mesh, random_partition(g.vertex_count(), k, s)));
      EXPECT_LT(metrics.edge_cut, best_random) << n << " " << k;
    }
}

TEST(Partition, EveryPartNonEmptyOnIrregularMesh) {
  const auto g = build_dual_graph(support::jittered_mesh(9, 2));
  for (int k = 1; k <= 12; ++k) {
    const auto pm = partition(g, k, 5);
    std::vector<int> size(static_cast<std::size_t>(k), 0);
    for (int p : pm.part) {
      ASSERT_GE(p, 0);
      ASSERT_LT(p, k);
      ++size[static_cast<std::size_t>(p)];
    }
    for (int s : size) EXPECT_GT(s, 0);
  }
}

TEST(Partition, DeterministicInSeed) {
  const auto g = build_dual_graph(structured_mesh(12));
  for (std::uint64_t seed : {0u, 1u, 77u}) {
    const auto a = partition(g, 4, seed), b = partition(g, 4, seed);
    EXPECT_EQ(a.part, b.part);
    EXPECT_LE(partition_metrics(g, a).imbalance, 1.10);
  }
}

TEST(PartitionMetrics, TwoTriangleSplit) {
  const auto g = build_dual_graph(structured_mesh(1));
  const PartitionMap pm{{0, 1}, 2};
  const auto m = partition_metrics(g, pm);
  EXPECT_EQ(m.edge_cut, 1u);
  EXPECT_EQ(m.halo_total, 2u);
  EXPECT_DOUBLE_EQ(m.imbalance, 1.0);
}

TEST(PartitionMetrics, MatchesBruteForce) {
  const auto mesh = support::jittered_mesh(6, 9);
  const auto g = build_dual_graph(mesh);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int k = 2 + static_cast<int>(s % 5);
    const auto pm = random_partition(g.vertex_count(), k, s);
    const auto m = partition_metrics(g, pm);
    EXPECT_EQ(m.edge_cut, recount_cut(mesh, pm));

    std::vector<std::set<std::size_t>> halo(static_cast<std::size_t>(k));
    std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
    for (std::size_t c = 0; c < pm.part.size(); ++c) ++size[static_cast<std::size_t>(pm.part[c])];
    for (const auto &f : mesh.faces()) {
      if (f.is_boundary()) continue;
      const int a = pm.part[f.left_cell], b = pm.part[f.right_cell];
      if (a == b) continue;
      halo[static_cast<std::size_t>(a)].insert(f.right_cell);
      halo[static_cast<std::size_t>(b)].insert(f.left_cell);
    }
    std::size_t halo_total = 0;
    for (const auto &h : halo) halo_total += h.size();
    EXPECT_EQ(m.halo_total, halo_total);
    const double mean = static_cast<double>(pm.part.size()) / k;
    EXPECT_DOUBLE_EQ(m.imbalance,
                     static_cast<double>(*std::max_element(size.begin(), size.end())) / mean);
  }
}

TEST(Subdomain, SingleRankHasNoHalo) {
  const auto mesh = structured_mesh(4);
  const auto subs = build_subdomains(mesh, partition(build_dual_graph(mesh), 1));
  ASSERT_EQ(subs.size(), 1u);
  EXPECT_TRUE(subs[0].halo_cells.empty());
  EXPECT_TRUE(subs[0].links.empty());
  EXPECT_EQ(subs[0].own_count(), mesh.cell_count());
  EXPECT_EQ(subs[0].faces.size(), mesh.face_count());
}

TEST(Subdomain, TwoCellsTwoRanks) {
  const auto mesh = structured_mesh(1);
  const auto subs = build_subdomains(mesh, PartitionMap{{0, 1}, 2});
  ASSERT_EQ(subs.size(), 2u);
  for (int r = 0; r < 2; ++r) {
    const auto &s = subs[static_cast<std::size_t>(r)];
    EXPECT_EQ(s.own_cells, std::vector<std::size_t>{static_cast<std::size_t>(r)});
    EXPECT_EQ(s.halo_cells, std::vector<std::size_t>{static_cast<std::size_t>(1 - r)});
    ASSERT_EQ(s.links.size(), 1u);
    EXPECT_EQ(s.links[0].rank, 1 - r);
  }
}

class SubdomainAudit : public ::testing::TestWithParam<int> {};

TEST_P(SubdomainAudit, GlobalFaceAudit) {
  const int k = GetParam();
  const auto mesh = structured_mesh(16);
  const auto pm = partition(build_dual_graph(mesh), k, 3);
  const auto subs = build_subdomains(mesh, pm);
  ASSERT_EQ(subs.size(), static_cast<std::size_t>(k));

  // Own cells form a partition of all cells, in ascending order.
  std::vector<int> owner(mesh.cell_count(), -1);
  for (const auto &s : subs) {
    EXPECT_TRUE(std::is_sorted(s.own_cells.begin(), s.own_cells.end()));
    EXPECT_TRUE(std::is_sorted(s.halo_cells.begin(), s.halo_cells.end()));
    for (auto c : s.own_cells) {
      EXPECT_EQ(owner[c], -1);
      owner[c] = s.rank;
    }
    std::vector<std::size_t> both;
    std::set_intersection(s.own_cells.begin(), s.own_cells.end(), s.halo_cells.begin(),
                          s.halo_cells.end(), std::back_inserter(both));
    EXPECT_TRUE(both.empty());
    for (std::size_t l = 0; l < s.local_count(); ++l) EXPECT_EQ(s.cell_g2l[s.cell_l2g[l]], l);
  }
  for (std::size_t c = 0; c < owner.size(); ++c) EXPECT_EQ(owner[c], pm.part[c]);

  // Every face crossing a part boundary appears on exactly its two ranks,
  // with opposite normals.
  std::map<std::size_t, std::vector<std::pair<int, Vec2>>> seen;
  for (const auto &s : subs)
    for (const auto &f : s.faces) {
      seen[f.global_face].push_back({s.rank, f.normal});
      EXPECT_LT(f.left, s.own_count());
      const Face &g = mesh.faces()[f.global_face];
      EXPECT_EQ(f.flipped, s.cell_l2g[f.left] != g.left_cell);
    }
  for (std::size_t fi = 0; fi < mesh.face_count(); ++fi) {
    const Face &f = mesh.faces()[fi];
    const bool crossing = !f.is_boundary() && pm.part[f.left_cell] != pm.part[f.right_cell];
    const auto &entries = seen[fi];
    if (crossing) {
      ASSERT_EQ(entries.size(), 2u);
      EXPECT_NE(entries[0].first, entries[1].first);
      EXPECT_EQ(entries[0].second, -entries[1].second);
    } else {
      EXPECT_EQ(entries.size(), 1u);
    }
  }

  // Exchange links mirror each other.
  for (const auto &s : subs)
    for (const auto &link : s.links) {
      const auto &peer = subs[static_cast<std::size_t>(link.rank)];
      auto back = std::find_if(peer.links.begin(), peer.links.end(),
                               [&](const NeighborLink &l) { return l.rank == s.rank; });
      ASSERT_NE(back, peer.links.end());
      ASSERT_EQ(link.send.size(), back->recv.size());
      for (std::size_t i = 0; i < link.send.size(); ++i) {
        EXPECT_EQ(s.cell_l2g[link.send[i]], peer.cell_l2g[back->recv[i]]);
        EXPECT_EQ(back->remote[i], link.send[i]);
      }
    }

  // Every halo cell is filled by exactly one link.
  for (const auto &s : subs) {
    std::vector<int> filled(s.local_count(), 0);
    for (const auto &link : s.links)
      for (auto slot : link.recv) ++filled[slot];
    for (std::size_t l = 0; l < s.local_count(); ++l)
      EXPECT_EQ(filled[l], l < s.own_count() ? 0 : 1);
  }
}

INSTANTIATE_TEST_SUITE_P(Ranks, SubdomainAudit, ::testing::Values(2, 4, 7));

TEST(Subdomain, HaloCoversFaceNeighbours) {
  const auto mesh = structured_mesh(10);
  const auto pm = partition(build_dual_graph(mesh), 4);
  const auto subs = build_subdomains(mesh, pm);
  for (const auto &s : subs)
    for (const auto &f : s.faces) {
      if (f.is_boundary()) continue;
      EXPECT_LT(f.right, s.local_count());
      EXPECT_EQ(s.is_halo_face(&f - s.faces.data()), f.right >= s.own_count());
    }
}
