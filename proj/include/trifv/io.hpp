#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "trifv/mesh.hpp"
#include "trifv/partition.hpp"

namespace trifv {

struct SimulationReport;

/// Legacy VTK ASCII unstructured grid: POINTS, CELLS (triangles),
/// CELL_TYPES and one CELL_DATA scalar block per field.
void write_vtk(std::ostream &out, const Mesh &mesh,
               const std::map<std::string, std::vector<double>> &cell_fields,
               const std::string &title = "trifv");
void write_vtk(const std::string &path, const Mesh &mesh,
               const std::map<std::string, std::vector<double>> &cell_fields,
               const std::string &title = "trifv");

/// `phase,seconds` rows.
void write_phase_csv(std::ostream &out, const SimulationReport &report);

/// Run summary as JSON.
void write_run_summary(std::ostream &out, const SimulationReport &report);

/// `cell_id,rank` rows.
void write_partition_csv(std::ostream &out, const PartitionMap &pm);

void write_partition_metrics(std::ostream &out, const PartitionMetrics &m);

} // namespace trifv
