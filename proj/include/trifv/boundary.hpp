#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "trifv/geometry.hpp"

namespace trifv {

enum class BoundaryKind {
  dirichlet, // face value g(x, t)
  neumann,   // zero gradient: face value copies the cell, no diffusive flux
  wall,      // no convective and no diffusive flux
};

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::neumann;
  std::function<double(Vec2, double)> value; // dirichlet only

  static BoundaryCondition dirichlet(double v) {
    return {BoundaryKind::dirichlet, [v](Vec2, double) { return v; }};
  }
  static BoundaryCondition dirichlet(std::function<double(Vec2, double)> g) {
    return {BoundaryKind::dirichlet, std::move(g)};
  }
  static BoundaryCondition neumann() { return {BoundaryKind::neumann, {}}; }
  static BoundaryCondition wall() { return {BoundaryKind::wall, {}}; }
};

/// Boundary conditions keyed by boundary label, with a fallback for labels
/// that are not listed.
class BoundarySpec {
public:
  BoundarySpec() = default;
  explicit BoundarySpec(BoundaryCondition fallback) : fallback_(std::move(fallback)) {}

  BoundarySpec &set(const std::string &label, BoundaryCondition bc) {
    by_label_[label] = std::move(bc);
    return *this;
  }
  BoundarySpec &set_fallback(BoundaryCondition bc) {
    fallback_ = std::move(bc);
    return *this;
  }

  const BoundaryCondition &at(const std::string &label) const {
    auto it = by_label_.find(label);
    return it == by_label_.end() ? fallback_ : it->second;
  }

  bool has_dirichlet() const {
    if (fallback_.kind == BoundaryKind::dirichlet) return true;
    for (const auto &[_, bc] : by_label_)
      if (bc.kind == BoundaryKind::dirichlet) return true;
    return false;
  }

  static BoundarySpec all(BoundaryCondition bc) { return BoundarySpec(std::move(bc)); }

private:
  std::map<std::string, BoundaryCondition> by_label_;
  BoundaryCondition fallback_ = BoundaryCondition::neumann();
};

/// Value imposed at a boundary node where faces with `labels` meet: the
/// mean of their Dirichlet data, or nothing when none of them is Dirichlet.
inline std::optional<double> dirichlet_node_value(const BoundarySpec &bc,
                                                  std::span<const std::string> labels,
                                                  Vec2 p, double time) {
  double sum = 0.0;
  int count = 0;
  for (const auto &label : labels) {
    const auto &cond = bc.at(label);
    if (cond.kind != BoundaryKind::dirichlet) continue;
    sum += cond.value(p, time);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

} // namespace trifv
