#include "trifv/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "trifv/errors.hpp"
#include "trifv/numfmt.hpp"

namespace trifv {

namespace {

using boost::property_tree::ptree;

std::vector<std::string> words(const std::string &s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string where(const std::string &section, const std::string &key) {
  return "[" + section + "] " + key;
}

double to_double(const std::string &section, const std::string &key,
                 const std::string &text) {
  double v = 0.0;
  const auto w = words(text);
  if (w.size() != 1 || !parse_double(w[0], v))
    throw ConfigError(where(section, key) + ": expected a number, got '" + text + "'");
  return v;
}

template <typename Int>
Int to_int(const std::string &section, const std::string &key, const std::string &text) {
  Int v{};
  const auto w = words(text);
  if (w.size() != 1 || !parse_int(w[0], v))
    throw ConfigError(where(section, key) + ": expected an integer, got '" + text + "'");
  return v;
}

Vec2 to_vec(const std::string &section, const std::string &key, const std::string &text) {
  const auto w = words(text);
  Vec2 v;
  if (w.size() != 2 || !parse_double(w[0], v.x) || !parse_double(w[1], v.y))
    throw ConfigError(where(section, key) + ": expected two numbers, got '" + text + "'");
  return v;
}

/// Visits every key of a section, rejecting keys not in `allowed` unless
/// `labels` is set (then unknown keys are passed through as labels).
template <typename Fn>
void each_key(const ptree &root, const std::string &section,
              const std::set<std::string> &allowed, Fn &&fn) {
  auto it = root.find(section);
  if (it == root.not_found()) return;
  for (const auto &[key, node] : it->second) {
    if (!allowed.empty() && !allowed.count(key))
      throw ConfigError("unknown key " + where(section, key));
    fn(key, node.data());
  }
}

void read_labels(const ptree &root, const std::string &section,
                 const std::set<std::string> &reserved, BoundarySpec &bc) {
  auto it = root.find(section);
  if (it == root.not_found()) return;
  for (const auto &[key, node] : it->second) {
    if (reserved.count(key)) continue;
    try {
      auto cond = parse_boundary(node.data());
      if (key == "default")
        bc.set_fallback(std::move(cond));
      else
        bc.set(key, std::move(cond));
    } catch (const ConfigError &e) {
      throw ConfigError(where(section, key) + ": " + e.what());
    }
  }
}

} // namespace

BoundaryCondition parse_boundary(const std::string &text) {
  const auto w = words(text);
  if (w.size() == 1 && w[0] == "neumann") return BoundaryCondition::neumann();
  if (w.size() == 1 && w[0] == "wall") return BoundaryCondition::wall();
  double v = 0.0;
  if (w.size() == 2 && w[0] == "dirichlet" && parse_double(w[1], v))
    return BoundaryCondition::dirichlet(v);
  throw ConfigError("expected 'dirichlet <value>', 'neumann' or 'wall', got '" + text + "'");
}

SimulationConfig parse_config(std::istream &in) {
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw ConfigError(e.what());
  }

  static const std::set<std::string> sections{"mesh",   "run",     "transport", "initial",
                                              "boundary", "poisson", "streamer"};
  for (const auto &[name, node] : root) {
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
    if (node.empty() && !node.data().empty())
      throw ConfigError("key '" + name + "' outside any section");
  }

  SimulationConfig c;

  each_key(root, "mesh", {"grid", "path"}, [&](const std::string &k, const std::string &v) {
    if (k == "grid") c.grid = to_int<std::size_t>("mesh", k, v);
    else c.mesh_path = v;
  });
  if (c.mesh_path.empty() && c.grid < 1) throw ConfigError("[mesh] grid must be at least 1");

  each_key(root, "run",
           {"physics", "ranks", "seed", "steps", "dt", "cfl", "output_every", "output_dir",
            "timeout_ms"},
           [&](const std::string &k, const std::string &v) {
             if (k == "physics") {
               if (v == "transport") c.physics = Physics::transport;
               else if (v == "coupled") c.physics = Physics::coupled;
               else if (v == "streamer") c.physics = Physics::streamer;
               else throw ConfigError("[run] physics: unknown value '" + v + "'");
             } else if (k == "ranks") c.ranks = to_int<int>("run", k, v);
             else if (k == "seed") c.seed = to_int<std::uint64_t>("run", k, v);
             else if (k == "steps") c.steps = to_int<std::size_t>("run", k, v);
             else if (k == "dt") c.dt = to_double("run", k, v);
             else if (k == "cfl") c.cfl = to_double("run", k, v);
             else if (k == "output_every") c.output_every = to_int<std::size_t>("run", k, v);
             else if (k == "output_dir") c.output_dir = v;
             else c.timeout = std::chrono::milliseconds(to_int<long>("run", k, v));
           });
  if (c.ranks < 1) throw ConfigError("[run] ranks must be at least 1");
  if (!(c.cfl > 0.0)) throw ConfigError("[run] cfl must be positive");

  each_key(root, "transport", {"velocity", "diffusion"},
           [&](const std::string &k, const std::string &v) {
             if (k == "velocity") c.transport.velocity = to_vec("transport", k, v);
             else c.transport.diffusion = to_double("transport", k, v);
           });
  if (c.transport.diffusion < 0.0) throw ConfigError("[transport] diffusion must be >= 0");

  c.transport.initial = GaussianSeed{{0.5, 0.5}, 0.1, 1.0, 0.0};
  each_key(root, "initial", {"center", "sigma", "amplitude", "background"},
           [&](const std::string &k, const std::string &v) {
             auto &g = c.transport.initial;
             if (k == "center") g.center = to_vec("initial", k, v);
             else if (k == "sigma") g.sigma = to_double("initial", k, v);
             else if (k == "amplitude") g.amplitude = to_double("initial", k, v);
             else g.background = to_double("initial", k, v);
           });
  if (!(c.transport.initial.sigma > 0.0)) throw ConfigError("[initial] sigma must be positive");

  // Boundary conditions of the transported quantity (u, or n_e / n_i).
  BoundarySpec density = c.physics == Physics::streamer
                             ? BoundarySpec::all(BoundaryCondition::wall())
                             : BoundarySpec::all(BoundaryCondition::neumann());
  read_labels(root, "boundary", {}, density);
  c.transport.bc = density;
  c.streamer.density_bc = density;

  static const std::set<std::string> poisson_keys{"source", "pin_cell", "pin_value"};
  auto pit = root.find("poisson");
  if (pit != root.not_found()) {
    for (const auto &[k, node] : pit->second) {
      const std::string &v = node.data();
      if (k == "source") c.poisson.source = to_double("poisson", k, v);
      else if (k == "pin_cell") c.poisson.options.pinned_cell = to_int<std::size_t>("poisson", k, v);
      else if (k == "pin_value") c.poisson.options.pinned_value = to_double("poisson", k, v);
    }
  }
  read_labels(root, "poisson", poisson_keys, c.poisson.bc);

  static const std::set<std::string> streamer_keys{
      "model", "mu_e", "D_e", "alpha", "eps", "q_e", "table",
      "seed_center", "seed_sigma", "seed_amplitude", "seed_background"};
  auto sit = root.find("streamer");
  if (sit != root.not_found()) {
    auto &co = c.streamer.coeffs;
    auto &sd = c.streamer.seed;
    for (const auto &[k, node] : sit->second) {
      const std::string &v = node.data();
      if (k.rfind("potential.", 0) == 0 || k.rfind("potential_", 0) == 0) {
        c.poisson.bc.set(k.substr(10), BoundaryCondition::dirichlet(to_double("streamer", k, v)));
        continue;
      }
      if (!streamer_keys.count(k)) throw ConfigError("unknown key " + where("streamer", k));
      if (k == "model") {
        if (v == "linear") co.model = StreamerCoefficients::Model::linear;
        else if (v == "table") co.model = StreamerCoefficients::Model::table;
        else throw ConfigError("[streamer] model: expected 'linear' or 'table'");
      } else if (k == "mu_e") co.mu_e = to_double("streamer", k, v);
      else if (k == "D_e") co.D_e = to_double("streamer", k, v);
      else if (k == "alpha") co.alpha = to_double("streamer", k, v);
      else if (k == "eps") co.eps = to_double("streamer", k, v);
      else if (k == "q_e") co.q_e = to_double("streamer", k, v);
      else if (k == "table") co.table = load_coefficient_table(v);
      else if (k == "seed_center") sd.center = to_vec("streamer", k, v);
      else if (k == "seed_sigma") sd.sigma = to_double("streamer", k, v);
      else if (k == "seed_amplitude") sd.amplitude = to_double("streamer", k, v);
      else sd.background = to_double("streamer", k, v);
    }
    if (co.model == StreamerCoefficients::Model::table && co.table.empty())
      throw ConfigError("[streamer] model = table needs a 'table' file");
    if (co.D_e < 0.0) throw ConfigError("[streamer] D_e must be >= 0");
    if (co.eps == 0.0) throw ConfigError("[streamer] eps must be nonzero");
    if (!(sd.sigma > 0.0)) throw ConfigError("[streamer] seed_sigma must be positive");
  }

  if (c.physics != Physics::transport && !c.poisson.bc.has_dirichlet() &&
      !c.poisson.options.pinned_cell)
    throw ConfigError("potential needs a dirichlet boundary or [poisson] pin_cell");
  return c;
}

SimulationConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_config(in);
}

} // namespace trifv
