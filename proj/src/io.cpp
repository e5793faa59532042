#include "trifv/io.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

#include "trifv/errors.hpp"
#include "trifv/numfmt.hpp"
#include "trifv/runtime.hpp"

namespace trifv {

void write_vtk(std::ostream &out, const Mesh &mesh,
               const std::map<std::string, std::vector<double>> &cell_fields,
               const std::string &title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.node_count() << " double\n";
  for (const auto &p : mesh.nodes())
    out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  out << "CELLS " << mesh.cell_count() << ' ' << 4 * mesh.cell_count() << '\n';
  for (const auto &t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.cell_count() << '\n';
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) out << "5\n";
  if (cell_fields.empty()) return;
  out << "CELL_DATA " << mesh.cell_count() << '\n';
  for (const auto &[name, values] : cell_fields) {
    if (values.size() != mesh.cell_count())
      throw DimensionMismatch("field '" + name + "' does not match the cell count");
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) out << format_double(v) << '\n';
  }
}

void write_vtk(const std::string &path, const Mesh &mesh,
               const std::map<std::string, std::vector<double>> &cell_fields,
               const std::string &title) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_vtk(out, mesh, cell_fields, title);
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_phase_csv(std::ostream &out, const SimulationReport &r) {
  out << "phase,seconds\n";
  out << "convection," << format_double(r.phases.convection) << '\n';
  out << "diffusion," << format_double(r.phases.diffusion) << '\n';
  out << "linear_solver," << format_double(r.phases.linear_solver) << '\n';
  out << "total," << format_double(r.phases.total) << '\n';
}

void write_run_summary(std::ostream &out, const SimulationReport &r) {
  nlohmann::ordered_json j;
  j["steps"] = r.steps;
  j["cells"] = r.cells;
  j["k"] = r.ranks;
  j["final_time"] = r.final_time;
  j["dt_min"] = r.dt_min;
  j["dt_max"] = r.dt_max;
  j["assemblies"] = r.assemblies;
  j["factorizations"] = r.factorizations;
  j["solves"] = r.solves;
  j["clip_count"] = r.clip_count;
  j["outputs"] = r.outputs;
  out << j.dump(2) << '\n';
}

void write_partition_csv(std::ostream &out, const PartitionMap &pm) {
  out << "cell_id,rank\n";
  for (std::size_t c = 0; c < pm.part.size(); ++c) out << c << ',' << pm.part[c] << '\n';
}

void write_partition_metrics(std::ostream &out, const PartitionMetrics &m) {
  nlohmann::ordered_json j;
  j["edge_cut"] = m.edge_cut;
  j["imbalance"] = m.imbalance;
  j["halo_total"] = m.halo_total;
  out << j.dump(2) << '\n';
}

} // namespace trifv
