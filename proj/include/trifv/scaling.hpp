#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trifv/errors.hpp"

namespace trifv {

inline constexpr std::array<std::string_view, 4> scaling_phases{
    "total", "convection", "diffusion", "linear_solver"};

/// Wall-clock seconds of one run per phase, in `scaling_phases` order.
struct ScalingRecord {
  int cores = 0;
  std::array<double, 4> seconds{};
};

struct ScalingRow {
  int cores = 0;
  double sp_ideal = 0.0;
  std::array<double, 4> speedup{};
  std::array<double, 4> efficiency{}; // percent
};

struct ScalingReport {
  int base_cores = 1;
  std::vector<ScalingRow> rows;
};

class MissingBase : public Error {
public:
  explicit MissingBase(int cores)
      : Error(ErrorClass::config,
              "no timing row for the base core count " + std::to_string(cores)) {}
};

/// Seconds from `123.5`, `49 h 54 min 48 s`, `49h54min48s` or shorter
/// forms such as `150h15min`. Returns false on anything else.
bool parse_duration(std::string_view text, double &seconds);

/// Reads `cores,total,convection,diffusion,linear_solver` rows. The
/// header line is optional; `#` starts a comment line.
std::vector<ScalingRecord> parse_timings(std::istream &in);
std::vector<ScalingRecord> load_timings(const std::string &path);

/// sp = t_b / t_N and efficiency = t_b N_b / (t_N N) * 100 per phase.
/// Throws MissingBase when no row has `base_cores`.
ScalingReport scaling_metrics(const std::vector<ScalingRecord> &records, int base_cores);

/// `cores,sp_ideal,sp_<phase>...,eff_<phase>...` rows.
void write_scaling_csv(std::ostream &out, const ScalingReport &report);

} // namespace trifv
