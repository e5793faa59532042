#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trifv/mesh.hpp"

namespace trifv::support {

/// Structured n x n mesh with interior nodes moved randomly by up to
/// `amplitude` grid spacings; boundary labels are kept.
inline Mesh jittered_mesh(std::size_t n, std::uint64_t seed, double amplitude = 0.25) {
  const Mesh base = structured_mesh(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-amplitude, amplitude);
  const double h = 1.0 / static_cast<double>(n);
  auto nodes = base.nodes();
  for (auto &p : nodes) {
    const bool interior = p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0;
    if (!interior) continue;
    p.x += jitter(rng) * h;
    p.y += jitter(rng) * h;
  }
  std::vector<BoundaryEdge> labels;
  for (const auto &f : base.faces())
    if (f.is_boundary()) labels.push_back({f.node_a, f.node_b, f.label});
  return Mesh(std::move(nodes), base.triangles(), labels);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// max |a - b| / max |b|.
inline double relative_inf_diff(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  return max_abs_diff(a, b) / (scale > 0.0 ? scale : 1.0);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() / ("trifv_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace trifv::support
