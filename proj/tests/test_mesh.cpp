#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "support.hpp"
#include "trifv/errors.hpp"
#include "trifv/mesh.hpp"

using namespace trifv;

namespace {

Mesh reference_triangle() { return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}); }

Mesh unit_square() { return structured_mesh(1); }

Mesh parse(const std::string &text) {
  std::istringstream in(text);
  return parse_mesh(in);
}

/// Two equilateral triangles sharing the unit edge (0,0)-(1,0).
Mesh equilateral_pair() {
  const double h = std::sqrt(3.0) / 2.0;
  return Mesh({{0, 0}, {1, 0}, {0.5, h}, {0.5, -h}}, {{0, 1, 2}, {1, 0, 3}});
}

} // namespace

TEST(Mesh, ReferenceTriangle) {
  const auto m = reference_triangle();
  EXPECT_EQ(m.cell_count(), 1u);
  EXPECT_EQ(m.face_count(), 3u);
  EXPECT_EQ(m.interior_face_count(), 0u);
  EXPECT_DOUBLE_EQ(m.cells()[0].area, 0.5);
  EXPECT_NEAR(m.cells()[0].centroid.x, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.cells()[0].centroid.y, 1.0 / 3.0, 1e-15);
  for (const auto &f : m.faces()) EXPECT_EQ(f.label, "default");
}

TEST(Mesh, UnitSquareHasOneInteriorFace) {
  const auto m = unit_square();
  EXPECT_EQ(m.cell_count(), 2u);
  EXPECT_EQ(m.face_count(), 5u);
  EXPECT_EQ(m.interior_face_count(), 1u);
  double total = 0.0;
  for (const auto &c : m.cells()) total += c.area;
  EXPECT_DOUBLE_EQ(total, 1.0);
}

TEST(Mesh, StructuredCountsMatchEdgeCount) {
  // Independent edge count: N(N+1) horizontal, N(N+1) vertical, N^2 diagonals.
  for (std::size_t n : {1u, 2u, 5u, 8u, 13u}) {
    const auto m = structured_mesh(n);
    EXPECT_EQ(m.cell_count(), 2 * n * n);
    EXPECT_EQ(m.face_count(), 2 * n * (n + 1) + n * n);
    const std::size_t boundary = m.face_count() - m.interior_face_count();
    EXPECT_EQ(boundary, 4 * n);
    EXPECT_EQ(2 * m.face_count(), 3 * m.cell_count() + boundary);
  }
  EXPECT_EQ(structured_mesh(8).face_count(), 208u);
}

TEST(Mesh, StructuredLabels) {
  const auto m = structured_mesh(4);
  std::map<std::string, int> count;
  for (const auto &f : m.faces())
    if (f.is_boundary()) {
      ++count[f.label];
      if (f.label == "left") EXPECT_EQ(f.midpoint.x, 0.0);
      if (f.label == "right") EXPECT_EQ(f.midpoint.x, 1.0);
      if (f.label == "bottom") EXPECT_EQ(f.midpoint.y, 0.0);
      if (f.label == "top") EXPECT_EQ(f.midpoint.y, 1.0);
    }
  EXPECT_EQ(count, (std::map<std::string, int>{{"bottom", 4}, {"left", 4}, {"right", 4}, {"top", 4}}));
}

TEST(Mesh, RandomMeshAreasSumToDomain) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = support::jittered_mesh(7, seed, 0.3);
    double total = 0.0;
    for (const auto &c : cell_geometry(m)) {
      EXPECT_GT(c.area, 0.0);
      total += c.area;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(Mesh, FaceInvariants) {
  const auto m = support::jittered_mesh(6, 11);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t c = 0; c < m.cell_count(); ++c)
    for (int e = 0; e < 3; ++e) {
      auto a = m.triangles()[c][e], b = m.triangles()[c][(e + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  EXPECT_EQ(edges.size(), m.face_count());
  for (const auto &f : m.faces()) {
    EXPECT_NEAR(norm(f.normal), 1.0, 1e-12);
    EXPECT_TRUE(edges.count({std::min(f.node_a, f.node_b), std::max(f.node_a, f.node_b)}));
    if (!f.is_boundary()) {
      const Vec2 d = m.cells()[f.right_cell].centroid - m.cells()[f.left_cell].centroid;
      EXPECT_GT(dot(f.normal, d), 0.0);
    }
  }
}

TEST(Mesh, ClosedCellNormals) {
  const auto m = support::jittered_mesh(6, 3);
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    Vec2 s;
    for (auto fi : m.cell_faces()[c]) {
      const Face &f = m.faces()[fi];
      const double sign = f.left_cell == c ? 1.0 : -1.0;
      s += sign * f.length * f.normal;
    }
    EXPECT_NEAR(s.x, 0.0, 1e-12);
    EXPECT_NEAR(s.y, 0.0, 1e-12);
  }
}

TEST(Mesh, SwappedOrientationFlipsNormal) {
  // The same diagonal seen from T1 instead of T0.
  const auto a = Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
  const auto b = Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 2, 3}, {0, 1, 2}});
  auto interior = [](const Mesh &m) {
    for (const auto &f : m.faces())
      if (!f.is_boundary()) return f;
    return Face{};
  };
  EXPECT_EQ(interior(a).normal, -interior(b).normal);
}

TEST(Mesh, CellFacesFollowEdgeOrder) {
  const auto m = structured_mesh(3);
  for (std::size_t c = 0; c < m.cell_count(); ++c)
    for (int e = 0; e < 3; ++e) {
      const Face &f = m.faces()[m.cell_faces()[c][e]];
      const std::set<std::size_t> want{m.triangles()[c][e], m.triangles()[c][(e + 1) % 3]};
      EXPECT_EQ((std::set<std::size_t>{f.node_a, f.node_b}), want);
    }
}

TEST(Mesh, NodeCellsAscending) {
  const auto m = structured_mesh(4);
  for (const auto &cells : m.node_cells()) {
    EXPECT_FALSE(cells.empty());
    EXPECT_TRUE(std::is_sorted(cells.begin(), cells.end()));
  }
}

TEST(Mesh, DiagonalDiamondArea) {
  const auto m = unit_square();
  const auto d = build_diamonds(m);
  ASSERT_EQ(d.size(), m.face_count());
  for (std::size_t f = 0; f < m.face_count(); ++f) {
    if (!m.faces()[f].is_boundary()) {
      // Shoelace on ((2/3,1/3), (0,0), (1/3,2/3), (1,1)).
      EXPECT_NEAR(d[f].area, 1.0 / 3.0, 1e-15);
      EXPECT_NEAR(d[f].lr_length, std::sqrt(2.0) / 3.0, 1e-15);
    }
  }
}

TEST(Mesh, BoundaryDiamondIsCentroidTriangle) {
  const auto m = reference_triangle();
  const auto d = build_diamonds(m);
  for (std::size_t f = 0; f < 3; ++f) {
    const Face &face = m.faces()[f];
    const Vec2 c = m.cells()[0].centroid;
    const double want = std::abs(signed_area(c, m.nodes()[face.node_a], m.nodes()[face.node_b]));
    EXPECT_GT(d[f].area, 0.0);
    EXPECT_NEAR(d[f].area, want, 1e-15);
  }
}

TEST(Mesh, InteriorDiamondMatchesQuadrilateral) {
  const auto m = support::jittered_mesh(5, 8);
  const auto d = build_diamonds(m);
  for (std::size_t fi = 0; fi < m.face_count(); ++fi) {
    const Face &f = m.faces()[fi];
    if (f.is_boundary()) continue;
    const Vec2 l = m.cells()[f.left_cell].centroid, r = m.cells()[f.right_cell].centroid;
    const Vec2 a = m.nodes()[f.node_a], b = m.nodes()[f.node_b];
    const double quad = std::abs(signed_area(l, a, r) + signed_area(l, r, b));
    EXPECT_NEAR(d[fi].area, quad, 1e-12);
    EXPECT_NEAR(norm(d[fi].lr_normal), 1.0, 1e-12);
  }
}

TEST(Mesh, EquilateralDiamondIsSymmetric) {
  const auto m = equilateral_pair();
  const auto d = build_diamonds(m);
  for (std::size_t fi = 0; fi < m.face_count(); ++fi) {
    const Face &f = m.faces()[fi];
    if (f.is_boundary()) continue;
    EXPECT_NEAR(dot(d[fi].lr_normal, f.normal), 0.0, 1e-15);
    // Centroids at distance h/3 on both sides of the unit edge.
    EXPECT_NEAR(d[fi].area, std::sqrt(3.0) / 6.0, 1e-15);
  }
}

TEST(Mesh, SymmetricStencilWeights) {
  std::vector<Vec2> samples;
  for (int i = 0; i < 3; ++i) {
    const double t = 2.0 * M_PI * i / 3.0 + 0.2;
    samples.push_back({std::cos(t), std::sin(t)});
  }
  std::vector<double> w;
  EXPECT_TRUE(least_squares_weights({0, 0}, samples, w));
  for (double v : w) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Mesh, CollinearStencilFallsBack) {
  const std::vector<Vec2> samples{{0, 0}, {1, 1}, {2, 2}};
  std::vector<double> w;
  EXPECT_FALSE(least_squares_weights({0.5, 0.0}, samples, w));
  double s = 0.0;
  for (double v : w) s += v;
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(Mesh, NodeWeightsExactForAffineFields) {
  const auto m = support::jittered_mesh(8, 21);
  const auto weights = node_weights(m);
  auto f = [](Vec2 p) { return 2.0 * p.x - p.y + 0.25; };
  std::size_t full_rank = 0;
  for (const auto &nw : weights) {
    double sum = 0.0, value = 0.0;
    for (const auto &c : nw.contributors) {
      sum += c.weight;
      value += c.weight * f(m.cells()[c.index].centroid);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    if (nw.rank_deficient) continue;
    ++full_rank;
    EXPECT_NEAR(value, f(m.nodes()[nw.node]), 1e-12);
  }
  // Only corner nodes with one or two cells are rank deficient.
  EXPECT_GE(full_rank, m.node_count() - 4);
}

TEST(Mesh, NodeWeightsUseHaloSamples) {
  // A corner node has one own cell; two extra samples make the stencil full.
  const auto m = reference_triangle();
  std::vector<std::vector<Vec2>> halo(3);
  halo[0] = {{-1.0 / 3.0, 1.0 / 3.0}, {1.0 / 3.0, -1.0 / 3.0}};
  const auto w = node_weights(m, halo);
  EXPECT_FALSE(w[0].rank_deficient);
  EXPECT_EQ(w[0].contributors.size(), 3u);
  EXPECT_TRUE(w[0].contributors[1].halo);
  EXPECT_TRUE(w[1].rank_deficient);
}

TEST(Mesh, RoundTripIsBitIdentical) {
  const auto m = support::jittered_mesh(5, 4);
  std::ostringstream first;
  write_mesh(m, first);
  const auto again = parse(first.str());
  std::ostringstream second;
  write_mesh(again, second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(again.nodes(), m.nodes());
  for (std::size_t f = 0; f < m.face_count(); ++f) EXPECT_EQ(again.faces()[f].label, m.faces()[f].label);
}

TEST(Mesh, ParseErrorsCarryLineNumbers) {
  try {
    parse("nodes 3\n0 0\n1 zero\n0 1\ntriangles 1\n0 1 2\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse("# header\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 7\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 7u);
  }
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("nodes 2\n0 0\n"), ParseError);
}

TEST(Mesh, CommentsAndLabelsParse) {
  const auto m = parse("nodes 3 # count\n0 0\n1 0\n0 1\n\ntriangles 1\n0 1 2\nboundary 1\n1 2 hyp\n");
  std::map<std::string, int> labels;
  for (const auto &f : m.faces()) ++labels[f.label];
  EXPECT_EQ(labels["hyp"], 1);
  EXPECT_EQ(labels["default"], 2);
}

TEST(Mesh, TopologyErrors) {
  // Clockwise triangle.
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}}), TopologyError);
  // Degenerate triangle.
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}), TopologyError);
  // Dangling node.
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {0, 1}, {5, 5}}, {{0, 1, 2}}), TopologyError);
  // Edge 0-1 shared by three triangles.
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {0.5, 2}},
                    {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}),
               TopologyError);
  // Label on an interior edge.
  const std::vector<BoundaryEdge> bad{{0, 2, "x"}};
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}}, bad),
               TopologyError);
}

TEST(Mesh, DegenerateDiamondIsRejected) {
  // The second triangle is a sliver of area 5e-17 against a mean of 0.25,
  // so the diamonds of its boundary edges fall below the floor.
  const auto m = Mesh({{0, 0}, {1, 0}, {0.5, 1.0}, {0.5, -1e-16}}, {{0, 1, 2}, {1, 0, 3}});
  EXPECT_THROW(build_diamonds(m), DegenerateDiamond);
  EXPECT_NO_THROW(build_diamonds(equilateral_pair()));
}
