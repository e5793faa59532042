#include "trifv/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <thread>

#include "trifv/direct_solver.hpp"
#include "trifv/errors.hpp"
#include "trifv/io.hpp"

namespace trifv {

// ---------------------------------------------------------------------------
// Links

void MessageLink::send(std::vector<double> message) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(message));
  }
  cv_.notify_one();
}

std::vector<double> MessageLink::receive(int waiting_rank,
                                         std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; }) ||
      queue_.empty())
    throw TimeoutError(waiting_rank);
  auto msg = std::move(queue_.front());
  queue_.pop_front();
  return msg;
}

void MessageLink::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

Network::Network(int ranks) : ranks_(ranks) {
  links_.resize(static_cast<std::size_t>(ranks) * static_cast<std::size_t>(ranks));
  for (auto &l : links_) l = std::make_unique<MessageLink>();
}

MessageLink &Network::link(int from, int to) {
  return *links_[static_cast<std::size_t>(from) * static_cast<std::size_t>(ranks_) +
                 static_cast<std::size_t>(to)];
}

void Network::shutdown() {
  for (auto &l : links_) l->close();
}

ExchangePlan ExchangePlan::from(const Subdomain &sub) {
  ExchangePlan plan;
  for (const auto &l : sub.links) plan.peers.push_back({l.rank, l.send, l.recv});
  return plan;
}

// ---------------------------------------------------------------------------
// Collectives

void halo_exchange(RankContext &ctx, Field &field) {
  // Post every send first, then drain; links are unbounded so this cannot
  // deadlock.
  for (const auto &peer : ctx.plan.peers) {
    std::vector<double> msg;
    msg.reserve(peer.send.size());
    for (auto c : peer.send) msg.push_back(field.values[c]);
    ctx.network->link(ctx.rank, peer.rank).send(std::move(msg));
  }
  for (const auto &peer : ctx.plan.peers) {
    auto msg = ctx.network->link(peer.rank, ctx.rank).receive(ctx.rank, ctx.timeout);
    if (msg.size() != peer.recv.size())
      throw DimensionMismatch("halo message from rank " + std::to_string(peer.rank) +
                              " has the wrong length");
    for (std::size_t i = 0; i < msg.size(); ++i) field.values[peer.recv[i]] = msg[i];
  }
}

std::optional<std::vector<double>> gather_rhs(RankContext &ctx,
                                              std::span<const double> own_values) {
  if (!ctx.is_host()) {
    ctx.network->link(ctx.rank, 0).send({own_values.begin(), own_values.end()});
    return std::nullopt;
  }
  const HostLayout &h = *ctx.host;
  std::vector<double> global(h.global_cells, 0.0);
  for (std::size_t i = 0; i < h.owned[0].size(); ++i) global[h.owned[0][i]] = own_values[i];
  for (int r = 1; r < ctx.ranks; ++r) {
    auto msg = ctx.network->link(r, 0).receive(0, ctx.timeout);
    const auto &ids = h.owned[static_cast<std::size_t>(r)];
    if (msg.size() != ids.size())
      throw DimensionMismatch("gather from rank " + std::to_string(r) +
                              " has the wrong length");
    for (std::size_t i = 0; i < msg.size(); ++i) global[ids[i]] = msg[i];
  }
  return global;
}

Field broadcast_solution(RankContext &ctx, const std::vector<double> *x, Quantity q) {
  Field out{q, 0.0, {}};
  if (ctx.is_host()) {
    const HostLayout &h = *ctx.host;
    if (!x || x->size() != h.global_cells)
      throw DimensionMismatch("broadcast vector does not match the global cell count");
    for (int r = 1; r < ctx.ranks; ++r) {
      const auto &slice = h.slices[static_cast<std::size_t>(r)];
      std::vector<double> msg(slice.size());
      for (std::size_t i = 0; i < slice.size(); ++i) msg[i] = (*x)[slice[i]];
      ctx.network->link(0, r).send(std::move(msg));
    }
    const auto &mine = h.slices[0];
    out.values.resize(mine.size());
    for (std::size_t i = 0; i < mine.size(); ++i) out.values[i] = (*x)[mine[i]];
  } else {
    out.values = ctx.network->link(0, ctx.rank).receive(ctx.rank, ctx.timeout);
    if (out.values.size() != ctx.sub->local_count())
      throw DimensionMismatch("broadcast slice has the wrong length");
  }
  return out;
}

namespace {

double allreduce(RankContext &ctx, double value,
                 const std::function<double(double, double)> &op) {
  if (!ctx.is_host()) {
    ctx.network->link(ctx.rank, 0).send({value});
    return ctx.network->link(0, ctx.rank).receive(ctx.rank, ctx.timeout).at(0);
  }
  double acc = value;
  for (int r = 1; r < ctx.ranks; ++r)
    acc = op(acc, ctx.network->link(r, 0).receive(0, ctx.timeout).at(0));
  for (int r = 1; r < ctx.ranks; ++r) ctx.network->link(0, r).send({acc});
  return acc;
}

} // namespace

double allreduce_min(RankContext &ctx, double value) {
  return allreduce(ctx, value, [](double a, double b) { return std::min(a, b); });
}

double allreduce_sum(RankContext &ctx, double value) {
  return allreduce(ctx, value, std::plus<double>{});
}

// ---------------------------------------------------------------------------
// Simulation loop

namespace {

/// Everything only the host touches.
struct HostResources {
  const Mesh *mesh = nullptr;
  const std::vector<DiamondCell> *diamonds = nullptr;
  const std::vector<NodeWeights> *weights = nullptr;
  HostLayout layout;
};

struct RankOutcome {
  PhaseTimes phases;
  std::size_t step = 0;
  const char *phase = "setup";
  std::exception_ptr error;
};

struct HostOutcome {
  SimulationReport report;
};

class RankWorker {
public:
  RankWorker(RankContext &ctx, const SimulationConfig &cfg, HostResources *host,
             RankOutcome &out, HostOutcome *host_out)
      : ctx_(ctx), cfg_(cfg), sub_(*ctx.sub), host_(host), out_(out),
        host_out_(host_out) {}

  void run();

private:
  void initialize();
  void setup_linear_system();
  Field solve_potential(std::span<const double> own_source, const BoundarySpec &bc);
  double choose_dt(std::span<const Vec2> velocity, std::span<const double> diffusion);
  void record_dt(double dt);
  void maybe_output(std::size_t step, bool force);
  std::map<std::string, std::vector<double>> gather_fields();

  void step_transport();
  void step_streamer();

  RankContext &ctx_;
  const SimulationConfig &cfg_;
  const Subdomain &sub_;
  HostResources *host_;
  RankOutcome &out_;
  HostOutcome *host_out_;

  Field u_;
  StreamerState s_;
  Field potential_{Quantity::potential, 0.0, {}};
  std::vector<double> face_diffusion_;
  std::vector<Vec2> face_velocity_;
  LuFactors lu_;
  SolveWorkspace ws_;
  std::size_t last_output_ = std::numeric_limits<std::size_t>::max();
  double time_ = 0.0;
};

void RankWorker::initialize() {
  out_.phase = "initialize";
  const std::size_t n = sub_.local_count();
  if (cfg_.physics == Physics::streamer) {
    s_.n_e.values.assign(n, 0.0);
    s_.n_i.values.assign(n, 0.0);
    s_.potential.values.assign(n, 0.0);
    for (std::size_t c = 0; c < sub_.own_count(); ++c) {
      s_.n_e.values[c] = cfg_.streamer.seed(sub_.cells[c].centroid);
      s_.n_i.values[c] = s_.n_e.values[c];
    }
    halo_exchange(ctx_, s_.n_e);
    halo_exchange(ctx_, s_.n_i);
  } else {
    u_.values.assign(n, 0.0);
    for (std::size_t c = 0; c < sub_.own_count(); ++c)
      u_.values[c] = cfg_.transport.initial(sub_.cells[c].centroid);
    halo_exchange(ctx_, u_);
    face_diffusion_.assign(sub_.faces.size(), cfg_.transport.diffusion);
    face_velocity_.assign(sub_.faces.size(), cfg_.transport.velocity);
    potential_.values.assign(n, 0.0);
  }
}

void RankWorker::setup_linear_system() {
  if (cfg_.physics == Physics::transport || !ctx_.is_host()) return;
  out_.phase = "assemble";
  ScopedTimer timer(out_.phases.linear_solver);
  const BoundarySpec &bc = cfg_.poisson.bc;
  lu_ = factorize(assemble_matrix(*host_->mesh, *host_->diamonds, *host_->weights, bc,
                                  cfg_.poisson.options));
}

Field RankWorker::solve_potential(std::span<const double> own_source,
                                  const BoundarySpec &bc) {
  out_.phase = "linear_solver";
  ScopedTimer timer(out_.phases.linear_solver);
  auto b_source = gather_rhs(ctx_, own_source);
  std::vector<double> x;
  if (ctx_.is_host()) {
    const auto b = assemble_rhs(*host_->mesh, *host_->diamonds, *b_source, bc,
                                cfg_.poisson.options, time_);
    x = solve(lu_, b, ws_);
  }
  Field p = broadcast_solution(ctx_, ctx_.is_host() ? &x : nullptr, Quantity::potential);
  p.time = time_;
  return p;
}

double RankWorker::choose_dt(std::span<const Vec2> velocity,
                             std::span<const double> diffusion) {
  out_.phase = "time_step";
  if (cfg_.dt > 0.0) return cfg_.dt;
  const double local = stable_dt(sub_, velocity, diffusion, cfg_.cfl);
  const double dt = allreduce_min(ctx_, local);
  if (!std::isfinite(dt))
    throw ConfigError("nothing moves: set an explicit dt for a steady configuration");
  return dt;
}

void RankWorker::record_dt(double dt) {
  if (!ctx_.is_host()) return;
  auto &r = host_out_->report;
  if (r.steps == 0) {
    r.dt_min = r.dt_max = dt;
  } else {
    r.dt_min = std::min(r.dt_min, dt);
    r.dt_max = std::max(r.dt_max, dt);
  }
}

std::map<std::string, std::vector<double>> RankWorker::gather_fields() {
  std::map<std::string, std::vector<double>> fields;
  auto collect = [&](const Field &f) {
    auto g = gather_rhs(ctx_, std::span(f.values).first(sub_.own_count()));
    if (g) fields[std::string(quantity_name(f.quantity))] = std::move(*g);
  };
  if (cfg_.physics == Physics::streamer) {
    collect(s_.n_e);
    collect(s_.n_i);
    collect(s_.potential);
  } else {
    collect(u_);
    if (cfg_.physics == Physics::coupled) collect(potential_);
  }
  return fields;
}

void RankWorker::maybe_output(std::size_t step, bool force) {
  if (cfg_.output_dir.empty() || step == last_output_) return;
  const bool due = step == 0 || force || (cfg_.output_every > 0 && step % cfg_.output_every == 0);
  if (!due) return;
  out_.phase = "output";
  last_output_ = step;
  auto fields = gather_fields();
  if (!ctx_.is_host()) return;
  char name[32];
  std::snprintf(name, sizeof name, "solution_%06zu.vtk", step);
  const auto path = (std::filesystem::path(cfg_.output_dir) / name).string();
  write_vtk(path, *host_->mesh, fields, "trifv step " + std::to_string(step));
  host_out_->report.outputs.push_back(path);
}

void RankWorker::step_transport() {
  if (cfg_.physics == Physics::coupled) {
    const std::vector<double> src(sub_.own_count(), cfg_.poisson.source);
    potential_ = solve_potential(src, cfg_.poisson.bc);
    out_.phase = "velocity";
    const auto pn = node_values(sub_, potential_, cfg_.poisson.bc);
    face_velocity_ = face_gradients(sub_, potential_, pn, cfg_.poisson.bc);
  }

  out_.phase = "exchange";
  halo_exchange(ctx_, u_);
  const double dt = choose_dt(face_velocity_, face_diffusion_);

  Residuals rez;
  {
    out_.phase = "convection";
    ScopedTimer timer(out_.phases.convection);
    rez.convective =
        cell_sums(sub_, convective_fluxes(sub_, u_, face_velocity_, cfg_.transport.bc));
  }
  {
    out_.phase = "diffusion";
    ScopedTimer timer(out_.phases.diffusion);
    const auto un = node_values(sub_, u_, cfg_.transport.bc);
    rez.diffusive = cell_sums(
        sub_, diffusive_fluxes(sub_, u_, un, face_diffusion_, cfg_.transport.bc));
  }
  u_ = explicit_step(sub_, u_, rez, dt);
  record_dt(dt);
  time_ += dt;
}

void RankWorker::step_streamer() {
  const auto src = poisson_source(sub_, s_, cfg_.streamer.coeffs);
  s_.potential = solve_potential(src, cfg_.poisson.bc);

  out_.phase = "electric_field";
  update_electric_field(sub_, s_, cfg_.poisson.bc);
  const auto drift = drift_coefficients(sub_, s_, cfg_.streamer.coeffs);

  out_.phase = "exchange";
  halo_exchange(ctx_, s_.n_e);
  const double dt = choose_dt(drift.velocity, drift.diffusion);

  out_.phase = "transport";
  advance_densities(sub_, s_, drift, cfg_.streamer.density_bc, dt, &out_.phases);
  record_dt(dt);
  time_ += dt;
  s_.potential.time = time_;
}

void RankWorker::run() {
  const auto t0 = std::chrono::steady_clock::now();
  initialize();
  setup_linear_system();
  maybe_output(0, false);

  for (std::size_t step = 1; step <= cfg_.steps; ++step) {
    out_.step = step;
    if (cfg_.physics == Physics::streamer)
      step_streamer();
    else
      step_transport();
    if (ctx_.is_host()) host_out_->report.steps = step;
    maybe_output(step, step == cfg_.steps);
  }

  out_.phase = "finalize";
  out_.step = cfg_.steps;
  auto fields = gather_fields();
  const double clips = allreduce_sum(ctx_, static_cast<double>(s_.clip_count));
  out_.phases.total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ctx_.is_host()) {
    auto &r = host_out_->report;
    r.final_fields = std::move(fields);
    r.final_time = time_;
    r.clip_count = static_cast<std::size_t>(clips);
  }
}

} // namespace

SimulationReport run_simulation(const SimulationConfig &cfg) {
  if (cfg.ranks < 1) throw InvalidK("ranks must be at least 1");

  const Mesh mesh = cfg.mesh_path.empty() ? structured_mesh(cfg.grid) : load_mesh(cfg.mesh_path);
  const auto diamonds = build_diamonds(mesh);
  const auto weights = node_weights(mesh);
  const auto pm = partition(build_dual_graph(mesh), cfg.ranks, cfg.seed);
  const auto subs = build_subdomains(mesh, pm, diamonds, weights);
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);

  HostResources host;
  host.mesh = &mesh;
  host.diamonds = &diamonds;
  host.weights = &weights;
  host.layout.global_cells = mesh.cell_count();
  for (const auto &s : subs) {
    host.layout.owned.push_back(s.own_cells);
    host.layout.slices.push_back(s.cell_l2g);
  }

  Network network(cfg.ranks);
  const auto k = static_cast<std::size_t>(cfg.ranks);
  std::vector<RankContext> contexts(k);
  std::vector<RankOutcome> outcomes(k);
  HostOutcome host_out;
  host_out.report.ranks = cfg.ranks;
  host_out.report.cells = mesh.cell_count();
  auto &counters = solver_counters();
  const std::size_t assemblies0 = counters.assemblies, factorizations0 = counters.factorizations,
                    solves0 = counters.solves;

  std::mutex failure_mu;
  std::exception_ptr first_failure;
  std::size_t failed_rank = 0;

  {
    std::vector<std::jthread> workers;
    workers.reserve(k);
    for (std::size_t r = 0; r < k; ++r) {
      RankContext &ctx = contexts[r];
      ctx.rank = static_cast<int>(r);
      ctx.ranks = cfg.ranks;
      ctx.sub = &subs[r];
      ctx.plan = ExchangePlan::from(subs[r]);
      ctx.network = &network;
      ctx.host = r == 0 ? &host.layout : nullptr;
      ctx.timeout = cfg.timeout;
      workers.emplace_back([&, r] {
        RankOutcome &out = outcomes[r];
        try {
          RankWorker worker(contexts[r], cfg, r == 0 ? &host : nullptr, out,
                            r == 0 ? &host_out : nullptr);
          worker.run();
        } catch (...) {
          out.error = std::current_exception();
          {
            std::lock_guard lock(failure_mu);
            if (!first_failure) {
              first_failure = out.error;
              failed_rank = r;
            }
          }
          network.shutdown();
        }
      });
    }
  }

  if (first_failure) {
    const RankOutcome &out = outcomes[failed_rank];
    try {
      std::rethrow_exception(first_failure);
    } catch (const Error &e) {
      throw SimulationError(e.error_class(), static_cast<int>(failed_rank), out.step,
                            out.phase, e.what());
    } catch (const std::exception &e) {
      throw SimulationError(ErrorClass::numeric, static_cast<int>(failed_rank), out.step,
                            out.phase, e.what());
    }
  }

  SimulationReport report = std::move(host_out.report);
  report.phases = outcomes[0].phases;
  report.assemblies = counters.assemblies - assemblies0;
  report.factorizations = counters.factorizations - factorizations0;
  report.solves = counters.solves - solves0;
  return report;
}

} // namespace trifv
