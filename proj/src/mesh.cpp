#include "trifv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>
#include <utility>

#include "trifv/errors.hpp"
#include "trifv/numfmt.hpp"

namespace trifv {

namespace {

using EdgeKey = std::pair<std::size_t, std::size_t>;

EdgeKey edge_key(std::size_t a, std::size_t b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

} // namespace

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
           std::span<const BoundaryEdge> labels)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
  const std::size_t n_nodes = nodes_.size();
  const std::size_t n_cells = triangles_.size();
  if (n_cells == 0) throw TopologyError("mesh has no triangles");

  cells_.resize(n_cells);
  node_cells_.assign(n_nodes, {});
  for (std::size_t c = 0; c < n_cells; ++c) {
    const auto &t = triangles_[c];
    for (auto v : t)
      if (v >= n_nodes)
        throw TopologyError("triangle " + std::to_string(c) +
                            " references missing node " + std::to_string(v));
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw TopologyError("triangle " + std::to_string(c) +
                          " repeats a node");
    const Vec2 a = nodes_[t[0]], b = nodes_[t[1]], c2 = nodes_[t[2]];
    const double area = signed_area(a, b, c2);
    if (!(area > 0.0))
      throw TopologyError("triangle " + std::to_string(c) +
                          " has non-positive signed area");
    cells_[c] = {area, (a + b + c2) / 3.0};
    for (auto v : t) node_cells_[v].push_back(c);
  }
  for (std::size_t v = 0; v < n_nodes; ++v)
    if (node_cells_[v].empty())
      throw TopologyError("dangling node " + std::to_string(v));

  std::map<EdgeKey, std::size_t> edge_to_face;
  cell_faces_.resize(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    const auto &t = triangles_[c];
    for (std::size_t e = 0; e < 3; ++e) {
      const std::size_t a = t[e], b = t[(e + 1) % 3];
      auto [it, inserted] = edge_to_face.try_emplace(edge_key(a, b), faces_.size());
      if (inserted) {
        Face f;
        f.node_a = a;
        f.node_b = b;
        f.left_cell = c;
        const Vec2 d = nodes_[b] - nodes_[a];
        f.length = norm(d);
        f.normal = rot_cw(d) / f.length;
        f.midpoint = 0.5 * (nodes_[a] + nodes_[b]);
        faces_.push_back(std::move(f));
      } else {
        Face &f = faces_[it->second];
        if (f.right_cell != no_cell)
          throw TopologyError("edge (" + std::to_string(a) + ", " +
                              std::to_string(b) +
                              ") shared by more than two triangles");
        if (f.node_a != b || f.node_b != a)
          throw TopologyError("triangles " + std::to_string(f.left_cell) +
                              " and " + std::to_string(c) +
                              " overlap across a shared edge");
        f.right_cell = c;
      }
      cell_faces_[c][e] = it->second;
    }
  }

  for (auto &f : faces_)
    if (f.is_boundary()) f.label = "default";
  for (const auto &be : labels) {
    auto it = edge_to_face.find(edge_key(be.node_a, be.node_b));
    if (it == edge_to_face.end() || !faces_[it->second].is_boundary())
      throw TopologyError("labelled edge (" + std::to_string(be.node_a) +
                          ", " + std::to_string(be.node_b) +
                          ") is not a boundary edge");
    faces_[it->second].label = be.label;
  }
}

std::size_t Mesh::interior_face_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      faces_.begin(), faces_.end(), [](const Face &f) { return !f.is_boundary(); }));
}

double Mesh::mean_cell_area() const noexcept {
  double s = 0.0;
  for (const auto &c : cells_) s += c.area;
  return cells_.empty() ? 0.0 : s / static_cast<double>(cells_.size());
}

std::vector<CellGeometry> cell_geometry(const Mesh &mesh) {
  std::vector<CellGeometry> out(mesh.cell_count());
  const auto &nodes = mesh.nodes();
  for (std::size_t c = 0; c < out.size(); ++c) {
    const auto &t = mesh.triangles()[c];
    const Vec2 a = nodes[t[0]], b = nodes[t[1]], d = nodes[t[2]];
    out[c] = {signed_area(a, b, d), (a + b + d) / 3.0};
  }
  return out;
}

std::vector<DiamondCell> build_diamonds(const Mesh &mesh) {
  const auto &cells = mesh.cells();
  const double floor = 1e-14 * mesh.mean_cell_area();
  std::vector<DiamondCell> out(mesh.face_count());
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face &face = mesh.faces()[f];
    const Vec2 left = cells[face.left_cell].centroid;
    const Vec2 right =
        face.is_boundary() ? face.midpoint : cells[face.right_cell].centroid;
    const Vec2 lr = right - left;
    DiamondCell d;
    d.face = f;
    // Half the cross product of the diagonals (R - L) and (B - A).
    d.area = 0.5 * dot(lr, face.normal) * face.length;
    d.lr_length = norm(lr);
    if (!(d.area > floor) || d.lr_length == 0.0) throw DegenerateDiamond(f);
    d.lr_normal = rot_cw(lr) / d.lr_length;
    out[f] = d;
  }
  return out;
}

bool least_squares_weights(Vec2 node, std::span<const Vec2> samples,
                           std::vector<double> &weights) {
  const std::size_t m = samples.size();
  weights.assign(m, 0.0);
  if (m == 0) return false;

  double h = 0.0;
  for (const auto &s : samples) h = std::max(h, norm(s - node));
  if (h == 0.0) h = 1.0;

  // Scaled offsets keep the normal equations scale invariant.
  std::vector<Vec2> d(m);
  for (std::size_t i = 0; i < m; ++i) d[i] = (samples[i] - node) / h;

  bool deficient = m < 3;
  if (!deficient) {
    Vec2 mean;
    for (const auto &v : d) mean += v;
    mean = mean / static_cast<double>(m);
    double cxx = 0, cxy = 0, cyy = 0;
    for (const auto &v : d) {
      const Vec2 e = v - mean;
      cxx += e.x * e.x;
      cxy += e.x * e.y;
      cyy += e.y * e.y;
    }
    const double tr = cxx + cyy;
    deficient = !(cxx * cyy - cxy * cxy > 1e-12 * tr * tr);
  }

  if (deficient) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      weights[i] = 1.0 / norm(d[i]);
      total += weights[i];
    }
    for (auto &w : weights) w /= total;
    return false;
  }

  // Normal matrix M = G^T G with rows [1, dx, dy]; weights = (M^-1 e1) . g.
  double s0 = static_cast<double>(m), sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto &v : d) {
    sx += v.x;
    sy += v.y;
    sxx += v.x * v.x;
    sxy += v.x * v.y;
    syy += v.y * v.y;
  }
  // First column of the inverse via cofactors.
  const double c00 = sxx * syy - sxy * sxy;
  const double c01 = -(sx * syy - sxy * sy);
  const double c02 = sx * sxy - sxx * sy;
  const double det = s0 * c00 + sx * c01 + sy * c02;
  const double z0 = c00 / det, z1 = c01 / det, z2 = c02 / det;
  for (std::size_t i = 0; i < m; ++i)
    weights[i] = z0 + z1 * d[i].x + z2 * d[i].y;
  return true;
}

std::vector<NodeWeights> node_weights(const Mesh &mesh,
                                      std::span<const std::vector<Vec2>> halo_samples) {
  std::vector<NodeWeights> out(mesh.node_count());
  std::vector<Vec2> pts;
  std::vector<double> w;
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    const auto &around = mesh.node_cells()[n];
    pts.clear();
    for (auto c : around) pts.push_back(mesh.cells()[c].centroid);
    const bool has_halo = n < halo_samples.size();
    if (has_halo)
      pts.insert(pts.end(), halo_samples[n].begin(), halo_samples[n].end());

    NodeWeights nw;
    nw.node = n;
    nw.rank_deficient = !least_squares_weights(mesh.nodes()[n], pts, w);
    nw.contributors.reserve(pts.size());
    for (std::size_t i = 0; i < around.size(); ++i)
      nw.contributors.push_back({around[i], w[i], false});
    if (has_halo)
      for (std::size_t i = 0; i < halo_samples[n].size(); ++i)
        nw.contributors.push_back({i, w[around.size() + i], true});
    out[n] = std::move(nw);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

struct LineReader {
  std::istream &in;
  std::size_t line_no = 0;
  std::string line;

  // Next non-empty line, comments stripped; false at EOF.
  bool next(std::vector<std::string_view> &tokens) {
    while (std::getline(in, line)) {
      ++line_no;
      if (auto p = line.find('#'); p != std::string::npos) line.resize(p);
      tokens = split_ws(line);
      if (!tokens.empty()) return true;
    }
    return false;
  }
};

std::size_t parse_count(const std::vector<std::string_view> &tok,
                        std::string_view keyword, std::size_t line) {
  std::size_t n = 0;
  if (tok.size() != 2 || tok[0] != keyword || !parse_int(tok[1], n))
    throw ParseError(line, "expected '" + std::string(keyword) + " <count>'");
  return n;
}

} // namespace

Mesh parse_mesh(std::istream &in) {
  LineReader rd{in, 0, {}};
  std::vector<std::string_view> tok;

  if (!rd.next(tok)) throw ParseError(rd.line_no, "empty mesh file");
  const std::size_t n_nodes = parse_count(tok, "nodes", rd.line_no);
  std::vector<Vec2> nodes(n_nodes);
  for (auto &p : nodes) {
    if (!rd.next(tok)) throw ParseError(rd.line_no, "unexpected end of node list");
    if (tok.size() != 2 || !parse_double(tok[0], p.x) || !parse_double(tok[1], p.y))
      throw ParseError(rd.line_no, "expected 'x y'");
  }

  if (!rd.next(tok)) throw ParseError(rd.line_no, "missing triangles section");
  const std::size_t n_tri = parse_count(tok, "triangles", rd.line_no);
  std::vector<Triangle> tris(n_tri);
  for (auto &t : tris) {
    if (!rd.next(tok))
      throw ParseError(rd.line_no, "unexpected end of triangle list");
    if (tok.size() != 3 || !parse_int(tok[0], t[0]) || !parse_int(tok[1], t[1]) ||
        !parse_int(tok[2], t[2]))
      throw ParseError(rd.line_no, "expected 'i j k'");
    for (auto v : t)
      if (v >= n_nodes) throw ParseError(rd.line_no, "node index out of range");
  }

  std::vector<BoundaryEdge> labels;
  if (rd.next(tok)) {
    const std::size_t n_b = parse_count(tok, "boundary", rd.line_no);
    labels.resize(n_b);
    for (auto &be : labels) {
      if (!rd.next(tok))
        throw ParseError(rd.line_no, "unexpected end of boundary list");
      if (tok.size() != 3 || !parse_int(tok[0], be.node_a) ||
          !parse_int(tok[1], be.node_b))
        throw ParseError(rd.line_no, "expected 'node_a node_b label'");
      be.label = std::string(tok[2]);
    }
    if (rd.next(tok)) throw ParseError(rd.line_no, "trailing content");
  }
  return Mesh(std::move(nodes), std::move(tris), labels);
}

Mesh load_mesh(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  return parse_mesh(in);
}

void write_mesh(const Mesh &mesh, std::ostream &out) {
  out << "nodes " << mesh.node_count() << '\n';
  for (const auto &p : mesh.nodes())
    out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  out << "triangles " << mesh.cell_count() << '\n';
  for (const auto &t : mesh.triangles())
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  std::size_t n_b = mesh.face_count() - mesh.interior_face_count();
  out << "boundary " << n_b << '\n';
  for (const auto &f : mesh.faces())
    if (f.is_boundary())
      out << f.node_a << ' ' << f.node_b << ' ' << f.label << '\n';
}

void save_mesh(const Mesh &mesh, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path + "'");
  write_mesh(mesh, out);
  if (!out) throw IoError("failed writing mesh file '" + path + "'");
}

std::vector<std::vector<std::string>> boundary_node_labels(const Mesh &mesh) {
  std::vector<std::vector<std::string>> out(mesh.node_count());
  for (const auto &f : mesh.faces()) {
    if (!f.is_boundary()) continue;
    for (auto v : {f.node_a, f.node_b})
      if (std::find(out[v].begin(), out[v].end(), f.label) == out[v].end())
        out[v].push_back(f.label);
  }
  return out;
}

Mesh structured_mesh(std::size_t n) {
  if (n == 0) throw TopologyError("structured mesh needs n >= 1");
  const std::size_t stride = n + 1;
  std::vector<Vec2> nodes;
  nodes.reserve(stride * stride);
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      nodes.push_back({static_cast<double>(i) / static_cast<double>(n),
                       static_cast<double>(j) / static_cast<double>(n)});

  std::vector<Triangle> tris;
  tris.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v00 = j * stride + i, v10 = v00 + 1;
      const std::size_t v01 = v00 + stride, v11 = v01 + 1;
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }

  std::vector<BoundaryEdge> labels;
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back({i, i + 1, "bottom"});
    labels.push_back({n * stride + i, n * stride + i + 1, "top"});
    labels.push_back({i * stride, (i + 1) * stride, "left"});
    labels.push_back({i * stride + n, (i + 1) * stride + n, "right"});
  }
  return Mesh(std::move(nodes), std::move(tris), labels);
}

} // namespace trifv
