#include "trifv/scaling.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "trifv/numfmt.hpp"

namespace trifv {

bool parse_duration(std::string_view text, double &seconds) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) return false;
  if (parse_double(s, seconds)) return seconds >= 0.0;

  // Sequence of <number><unit> with units h, min, s in that order.
  static constexpr std::pair<std::string_view, double> units[] = {
      {"h", 3600.0}, {"min", 60.0}, {"s", 1.0}};
  double total = 0.0;
  std::size_t pos = 0, next_unit = 0;
  while (pos < s.size()) {
    std::size_t end = pos;
    while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.'))
      ++end;
    if (end == pos) return false;
    double v = 0.0;
    if (!parse_double(std::string_view(s).substr(pos, end - pos), v)) return false;
    bool matched = false;
    for (; next_unit < std::size(units); ++next_unit) {
      const auto &[name, scale] = units[next_unit];
      if (s.compare(end, name.size(), name) == 0) {
        total += v * scale;
        pos = end + name.size();
        ++next_unit;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  seconds = total;
  return true;
}

std::vector<ScalingRecord> parse_timings(std::istream &in) {
  std::vector<ScalingRecord> out;
  std::set<int> seen;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
      continue;
    const bool header_allowed = first;
    first = false;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ScalingRecord r;
    std::string cores = cells.empty() ? "" : cells[0];
    cores.erase(0, cores.find_first_not_of(" \t"));
    cores.erase(cores.find_last_not_of(" \t") + 1);
    bool ok = cells.size() == 5 && parse_int(cores, r.cores);
    for (std::size_t p = 0; ok && p < 4; ++p) ok = parse_duration(cells[p + 1], r.seconds[p]);
    if (!ok) {
      if (header_allowed) continue;
      throw ParseError(line_no, "expected 'cores,total,convection,diffusion,linear_solver'");
    }
    if (r.cores < 1) throw ParseError(line_no, "core count must be positive");
    for (double t : r.seconds)
      if (!(t > 0.0)) throw ParseError(line_no, "times must be positive");
    if (!seen.insert(r.cores).second)
      throw ParseError(line_no, "duplicate core count " + std::to_string(r.cores));
    out.push_back(r);
  }
  return out;
}

std::vector<ScalingRecord> load_timings(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open timings '" + path + "'");
  return parse_timings(in);
}

ScalingReport scaling_metrics(const std::vector<ScalingRecord> &records, int base_cores) {
  const ScalingRecord *base = nullptr;
  for (const auto &r : records)
    if (r.cores == base_cores) base = &r;
  if (!base) throw MissingBase(base_cores);

  ScalingReport rep;
  rep.base_cores = base_cores;
  for (const auto &r : records) {
    ScalingRow row;
    row.cores = r.cores;
    row.sp_ideal = static_cast<double>(r.cores) / base_cores;
    for (std::size_t p = 0; p < 4; ++p) {
      const double tb = base->seconds[p], tn = r.seconds[p];
      row.speedup[p] = tb / tn;
      row.efficiency[p] = tb * base_cores / (tn * r.cores) * 100.0;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

void write_scaling_csv(std::ostream &out, const ScalingReport &report) {
  out << "cores,sp_ideal";
  for (auto p : scaling_phases) out << ",sp_" << p;
  for (auto p : scaling_phases) out << ",eff_" << p;
  out << '\n';
  for (const auto &r : report.rows) {
    out << r.cores << ',' << format_double(r.sp_ideal);
    for (double v : r.speedup) out << ',' << format_double(v);
    for (double v : r.efficiency) out << ',' << format_double(v);
    out << '\n';
  }
}

} // namespace trifv
