#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trifv/config.hpp"
#include "trifv/convergence.hpp"
#include "trifv/errors.hpp"
#include "trifv/io.hpp"
#include "trifv/mesh.hpp"
#include "trifv/partition.hpp"
#include "trifv/runtime.hpp"
#include "trifv/scaling.hpp"

namespace {

enum Exit { ok = 0, config_error = 2, numeric_error = 3, io_error = 4 };

struct Globals {
  std::string config;
  std::optional<int> ranks;
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream f(path);
  if (!f) throw trifv::IoError("cannot write '" + path.string() + "'");
  return f;
}

std::filesystem::path out_dir(const Globals &g) {
  std::filesystem::path dir = g.out.empty() ? "." : g.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw trifv::IoError("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

int cmd_genmesh(std::size_t n, const std::string &file) {
  if (n < 1) throw trifv::ConfigError("grid size must be at least 1");
  const auto mesh = trifv::structured_mesh(n);
  trifv::save_mesh(mesh, file);
  std::cout << "wrote " << file << ": " << mesh.node_count() << " nodes, " << mesh.cell_count()
            << " cells, " << mesh.face_count() << " faces\n";
  return ok;
}

int cmd_partition(const Globals &g, const std::string &mesh_path, std::size_t grid) {
  trifv::SimulationConfig cfg;
  if (!g.config.empty()) cfg = trifv::load_config(g.config);
  if (!mesh_path.empty()) cfg.mesh_path = mesh_path;
  if (grid > 0) {
    cfg.grid = grid;
    cfg.mesh_path.clear();
  }
  if (g.ranks) cfg.ranks = *g.ranks;
  if (g.seed) cfg.seed = *g.seed;

  const auto mesh =
      cfg.mesh_path.empty() ? trifv::structured_mesh(cfg.grid) : trifv::load_mesh(cfg.mesh_path);
  const auto graph = trifv::build_dual_graph(mesh);
  const auto pm = trifv::partition(graph, cfg.ranks, cfg.seed);
  const auto metrics = trifv::partition_metrics(graph, pm);

  const auto dir = out_dir(g);
  auto csv = open_out(dir / "partition.csv");
  trifv::write_partition_csv(csv, pm);
  auto json = open_out(dir / "partition_metrics.json");
  trifv::write_partition_metrics(json, metrics);
  trifv::write_partition_metrics(std::cout, metrics);
  return ok;
}

int cmd_run(const Globals &g) {
  if (g.config.empty()) throw trifv::ConfigError("run needs --config");
  auto cfg = trifv::load_config(g.config);
  if (g.ranks) cfg.ranks = *g.ranks;
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (cfg.output_dir.empty()) cfg.output_dir = ".";

  const auto report = trifv::run_simulation(cfg);
  const std::filesystem::path dir = cfg.output_dir;
  auto phases = open_out(dir / "phases.csv");
  trifv::write_phase_csv(phases, report);
  auto summary = open_out(dir / "summary.json");
  trifv::write_run_summary(summary, report);
  trifv::write_run_summary(std::cout, report);
  if (report.clip_count > 0)
    std::cerr << "warning: " << report.clip_count << " negative densities clipped\n";
  return ok;
}

int cmd_scaling(const Globals &g, const std::string &timings, int base) {
  const auto report = trifv::scaling_metrics(trifv::load_timings(timings), base);
  if (g.out.empty()) {
    trifv::write_scaling_csv(std::cout, report);
  } else {
    auto f = open_out(out_dir(g) / "scaling.csv");
    trifv::write_scaling_csv(f, report);
  }
  return ok;
}

int cmd_convergence(const Globals &g, const std::string &case_id,
                    const std::vector<std::size_t> &sizes) {
  const auto table =
      trifv::run_convergence(case_id, sizes.empty() ? std::vector<std::size_t>{8, 16, 32} : sizes);
  if (g.out.empty()) {
    trifv::write_convergence_csv(std::cout, table);
  } else {
    auto f = open_out(out_dir(g) / ("convergence_" + case_id + ".csv"));
    trifv::write_convergence_csv(f, table);
  }
  return ok;
}

int exit_code(trifv::ErrorClass cls) {
  switch (cls) {
  case trifv::ErrorClass::config: return config_error;
  case trifv::ErrorClass::numeric: return numeric_error;
  case trifv::ErrorClass::io: return io_error;
  }
  return numeric_error;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Finite-volume transport and Poisson solver on triangular meshes"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Configuration file");
  app.add_option("--ranks", g.ranks, "Number of in-process ranks")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Partition seed");
  app.add_option("--out", g.out, "Output directory");

  std::size_t gen_n = 0;
  std::string gen_file;
  auto *genmesh = app.add_subcommand("genmesh", "Write a structured N x N triangulation of the unit square");
  genmesh->add_option("N", gen_n, "Squares per side")->required();
  genmesh->add_option("FILE", gen_file, "Output mesh file")->required();

  std::string part_mesh;
  std::size_t part_grid = 0;
  auto *part = app.add_subcommand("partition", "Split a mesh into --ranks parts");
  part->add_option("MESH", part_mesh, "Mesh file (default: the configured mesh)");
  part->add_option("--grid", part_grid, "Use a structured N x N mesh instead");

  auto *run = app.add_subcommand("run", "Run the simulation described by --config");

  std::string timings;
  int base = 1;
  auto *scaling = app.add_subcommand("scaling", "Speedup and efficiency from a timings CSV");
  scaling->add_option("TIMINGS", timings, "cores,total,convection,diffusion,linear_solver")
      ->required();
  scaling->add_option("--base", base, "Core count of the reference run");

  std::string case_id;
  std::vector<std::size_t> sizes;
  auto *conv = app.add_subcommand("convergence", "Errors and observed orders of a manufactured case");
  conv->add_option("CASE", case_id, "poisson_sine | advect_gauss | diffuse_gauss")->required();
  conv->add_option("SIZES", sizes, "Mesh sizes N (default: 8 16 32)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }

  try {
    if (*genmesh) return cmd_genmesh(gen_n, gen_file);
    if (*part) return cmd_partition(g, part_mesh, part_grid);
    if (*run) return cmd_run(g);
    if (*scaling) return cmd_scaling(g, timings, base);
    if (*conv) return cmd_convergence(g, case_id, sizes);
  } catch (const trifv::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.error_class());
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return io_error;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return numeric_error;
  }
  return ok;
}
