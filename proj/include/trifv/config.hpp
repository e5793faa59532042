#pragma once

#include <iosfwd>
#include <string>

#include "trifv/runtime.hpp"

namespace trifv {

/// Parses a `key = value` file with `[section]` headers into a run
/// configuration. Unknown sections or keys are rejected so typos surface
/// as ConfigError. See README for the schema.
SimulationConfig parse_config(std::istream &in);
SimulationConfig load_config(const std::string &path);

/// Parses one boundary declaration: `dirichlet <value>`, `neumann` or
/// `wall`.
BoundaryCondition parse_boundary(const std::string &text);

} // namespace trifv
