#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trifv/boundary.hpp"
#include "trifv/partition.hpp"
#include "trifv/poisson.hpp"
#include "trifv/streamer.hpp"
#include "trifv/timing.hpp"
#include "trifv/transport.hpp"

namespace trifv {

/// Ordered point-to-point channel between two ranks. Messages arrive in
/// send order.
class MessageLink {
public:
  void send(std::vector<double> message);
  /// Throws TimeoutError(waiting_rank) after `timeout`, or immediately once
  /// the link is closed and drained.
  std::vector<double> receive(int waiting_rank, std::chrono::milliseconds timeout);
  void close();

private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<double>> queue_;
  bool closed_ = false;
};

/// All links of one simulation: one per ordered pair of neighbouring
/// ranks, plus host links between rank 0 and every other rank.
class Network {
public:
  explicit Network(int ranks);
  MessageLink &link(int from, int to);
  /// Closes every link so blocked peers fail fast after a rank error.
  void shutdown();
  int ranks() const noexcept { return ranks_; }

private:
  int ranks_;
  std::vector<std::unique_ptr<MessageLink>> links_; // from * ranks + to
};

/// Static per-neighbour send/receive lists derived from the subdomain.
struct ExchangePlan {
  struct Peer {
    int rank = 0;
    std::vector<std::size_t> send; // local own cells
    std::vector<std::size_t> recv; // local halo slots
  };
  std::vector<Peer> peers; // ascending rank

  static ExchangePlan from(const Subdomain &sub);
};

/// Layout knowledge the host keeps after partitioning: which global cells
/// each rank owns, and each rank's local own+halo slice.
struct HostLayout {
  std::size_t global_cells = 0;
  std::vector<std::vector<std::size_t>> owned;  // per rank, global ids
  std::vector<std::vector<std::size_t>> slices; // per rank, local-to-global
};

struct RankContext {
  int rank = 0;
  int ranks = 1;
  const Subdomain *sub = nullptr;
  ExchangePlan plan;
  Network *network = nullptr;
  const HostLayout *host = nullptr; // rank 0 only
  std::chrono::milliseconds timeout{30000};

  bool is_host() const noexcept { return rank == 0; }
};

/// Refreshes the halo slots of `field` from their owners. Collective.
void halo_exchange(RankContext &ctx, Field &field);

/// Own-cell values of every rank assembled on the host in global order;
/// empty on other ranks. Collective.
std::optional<std::vector<double>> gather_rhs(RankContext &ctx,
                                              std::span<const double> own_values);

/// Scatters the host's global vector: each rank receives its own + halo
/// slice. `x` is read on the host only. Collective.
Field broadcast_solution(RankContext &ctx, const std::vector<double> *x, Quantity q);

double allreduce_min(RankContext &ctx, double value);
double allreduce_sum(RankContext &ctx, double value);

enum class Physics {
  transport, // given velocity and diffusion
  coupled,   // velocity = grad P with -Laplace(P) = source
  streamer,
};

struct TransportSettings {
  Vec2 velocity;
  double diffusion = 1.0;
  GaussianSeed initial;
  BoundarySpec bc;
};

struct PoissonSettings {
  double source = 0.0;
  BoundarySpec bc = BoundarySpec::all(BoundaryCondition::dirichlet(0.0));
  PoissonOptions options;
};

struct StreamerSettings {
  StreamerCoefficients coeffs;
  GaussianSeed seed{{0.5, 0.5}, 0.05, 1.0, 1e-3};
  BoundarySpec density_bc = BoundarySpec::all(BoundaryCondition::wall());
};

struct SimulationConfig {
  std::string mesh_path; // empty: structured grid
  std::size_t grid = 16;
  int ranks = 1;
  std::uint64_t seed = 0;
  std::size_t steps = 10;
  double dt = 0.0; // <= 0: stable_dt with `cfl`
  double cfl = 0.4;
  std::size_t output_every = 0; // 0: initial and final state only
  std::string output_dir;       // empty: no files
  Physics physics = Physics::transport;
  TransportSettings transport;
  PoissonSettings poisson;
  StreamerSettings streamer;
  std::chrono::milliseconds timeout{30000};
};

struct SimulationReport {
  PhaseTimes phases;
  std::size_t steps = 0;
  std::size_t cells = 0;
  int ranks = 1;
  double final_time = 0.0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  std::size_t assemblies = 0;
  std::size_t factorizations = 0;
  std::size_t solves = 0;
  std::size_t clip_count = 0;
  std::map<std::string, std::vector<double>> final_fields; // global order
  std::vector<std::string> outputs;
};

/// Runs the partitioned simulation with one worker thread per rank:
/// the host reads and splits the mesh, builds subdomains and (for coupled
/// physics) assembles and factorizes the Poisson matrix once; each step
/// then solves the potential, exchanges halos, evaluates fluxes and
/// updates the own cells. Errors abort every rank and are rethrown with
/// the failing rank, step and phase.
SimulationReport run_simulation(const SimulationConfig &config);

} // namespace trifv
