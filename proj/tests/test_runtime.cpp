#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <random>
#include <thread>

#include "support.hpp"
#include "trifv/errors.hpp"
#include "trifv/runtime.hpp"

using namespace trifv;
using namespace std::chrono_literals;

namespace {

struct Cluster {
  Mesh mesh;
  std::vector<Subdomain> subs;
  HostLayout layout;

  Cluster(Mesh m, int k) : mesh(std::move(m)) {
    subs = build_subdomains(mesh, partition(build_dual_graph(mesh), k));
    layout.global_cells = mesh.cell_count();
    for (const auto &s : subs) {
      layout.owned.push_back(s.own_cells);
      layout.slices.push_back(s.cell_l2g);
    }
  }

  /// Runs `body` once per rank on its own thread.
  void run(const std::function<void(RankContext &)> &body) {
    const int k = static_cast<int>(subs.size());
    Network net(k);
    std::vector<RankContext> ctx(subs.size());
    std::vector<std::exception_ptr> errors(subs.size());
    {
      std::vector<std::jthread> threads;
      for (int r = 0; r < k; ++r) {
        auto &c = ctx[static_cast<std::size_t>(r)];
        c.rank = r;
        c.ranks = k;
        c.sub = &subs[static_cast<std::size_t>(r)];
        c.plan = ExchangePlan::from(*c.sub);
        c.network = &net;
        c.host = r == 0 ? &layout : nullptr;
        c.timeout = 5s;
        threads.emplace_back([&, r] {
          try {
            body(ctx[static_cast<std::size_t>(r)]);
          } catch (...) {
            errors[static_cast<std::size_t>(r)] = std::current_exception();
            net.shutdown();
          }
        });
      }
    }
    for (auto &e : errors)
      if (e) std::rethrow_exception(e);
  }
};

SimulationConfig diffusion_config(int ranks) {
  SimulationConfig cfg;
  cfg.grid = 16;
  cfg.ranks = ranks;
  cfg.steps = 50;
  cfg.transport.diffusion = 1.0;
  cfg.transport.initial = GaussianSeed{{0.4, 0.55}, 0.1, 1.0, 0.0};
  cfg.transport.bc = BoundarySpec::all(BoundaryCondition::dirichlet(0.0));
  return cfg;
}

} // namespace

TEST(MessageLink, PreservesOrder) {
  MessageLink link;
  for (int i = 0; i < 5; ++i) link.send({static_cast<double>(i)});
  for (int i = 0; i < 5; ++i) EXPECT_EQ(link.receive(0, 1s).at(0), i);
}

TEST(MessageLink, TimesOutWithRank) {
  MessageLink link;
  try {
    link.receive(3, 10ms);
    FAIL();
  } catch (const TimeoutError &e) {
    EXPECT_EQ(e.rank(), 3);
  }
}

TEST(MessageLink, CloseWakesReceivers) {
  MessageLink link;
  std::jthread closer([&] {
    std::this_thread::sleep_for(20ms);
    link.close();
  });
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(link.receive(1, 10s), TimeoutError);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
}

TEST(ExchangePlan, MatchesLinks) {
  Cluster c(structured_mesh(8), 3);
  for (const auto &s : c.subs) {
    const auto plan = ExchangePlan::from(s);
    ASSERT_EQ(plan.peers.size(), s.links.size());
    for (std::size_t i = 0; i < plan.peers.size(); ++i) {
      EXPECT_EQ(plan.peers[i].rank, s.links[i].rank);
      EXPECT_EQ(plan.peers[i].send, s.links[i].send);
      EXPECT_EQ(plan.peers[i].recv, s.links[i].recv);
      if (i > 0) EXPECT_LT(plan.peers[i - 1].rank, plan.peers[i].rank);
    }
  }
}

TEST(HaloExchange, SingleRankIsNoOp) {
  Cluster c(structured_mesh(4), 1);
  c.run([](RankContext &ctx) {
    Field u{Quantity::u, 0.0, std::vector<double>(ctx.sub->local_count(), 7.0)};
    const auto before = u.values;
    halo_exchange(ctx, u);
    EXPECT_EQ(u.values, before);
  });
}

TEST(HaloExchange, TwoRanksSeeEachOther) {
  Cluster c(structured_mesh(6), 2);
  c.run([](RankContext &ctx) {
    Field u{Quantity::u, 0.0, std::vector<double>(ctx.sub->local_count(), -1.0)};
    for (std::size_t i = 0; i < ctx.sub->own_count(); ++i) u.values[i] = ctx.rank;
    halo_exchange(ctx, u);
    for (std::size_t i = ctx.sub->own_count(); i < u.values.size(); ++i)
      EXPECT_EQ(u.values[i], 1 - ctx.rank);
  });
}

TEST(HaloExchange, RandomFieldMatchesOwners) {
  Cluster c(support::jittered_mesh(12, 3), 4);
  std::vector<double> global(c.mesh.cell_count());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (auto &v : global) v = val(rng);
  c.run([&](RankContext &ctx) {
    Field u{Quantity::u, 0.0, std::vector<double>(ctx.sub->local_count(), 0.0)};
    for (std::size_t i = 0; i < ctx.sub->own_count(); ++i) u.values[i] = global[ctx.sub->cell_l2g[i]];
    halo_exchange(ctx, u);
    halo_exchange(ctx, u); // repeated exchanges stay in step
    for (std::size_t i = 0; i < u.values.size(); ++i) EXPECT_EQ(u.values[i], global[ctx.sub->cell_l2g[i]]);
  });
}

TEST(GatherRhs, GlobalOrder) {
  for (int k : {1, 3, 8}) {
    Cluster c(structured_mesh(8), k);
    std::vector<double> gathered;
    c.run([&](RankContext &ctx) {
      std::vector<double> own;
      for (auto g : ctx.sub->own_cells) own.push_back(static_cast<double>(g));
      auto got = gather_rhs(ctx, own);
      EXPECT_EQ(got.has_value(), ctx.is_host());
      if (got) gathered = *got;
    });
    ASSERT_EQ(gathered.size(), c.mesh.cell_count());
    for (std::size_t i = 0; i < gathered.size(); ++i) EXPECT_EQ(gathered[i], static_cast<double>(i));
  }
}

TEST(GatherRhs, RankCountIndependent) {
  std::vector<double> global(128);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  for (auto &v : global) v = val(rng);
  std::vector<std::vector<double>> results;
  for (int k : {1, 8}) {
    Cluster c(structured_mesh(8), k);
    c.run([&](RankContext &ctx) {
      std::vector<double> own;
      for (auto g : ctx.sub->own_cells) own.push_back(global[g]);
      if (auto got = gather_rhs(ctx, own)) results.push_back(*got);
    });
  }
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0], results[1]);
}

TEST(BroadcastSolution, ScattersOwnAndHaloSlices) {
  for (int k : {1, 4}) {
    Cluster c(structured_mesh(8), k);
    std::vector<double> x(c.mesh.cell_count());
    std::iota(x.begin(), x.end(), 0.0);
    c.run([&](RankContext &ctx) {
      const Field f = broadcast_solution(ctx, ctx.is_host() ? &x : nullptr, Quantity::potential);
      EXPECT_EQ(f.quantity, Quantity::potential);
      ASSERT_EQ(f.values.size(), ctx.sub->local_count());
      for (std::size_t i = 0; i < f.values.size(); ++i)
        EXPECT_EQ(f.values[i], static_cast<double>(ctx.sub->cell_l2g[i]));
    });
  }
}

TEST(Allreduce, MinAndSum) {
  Cluster c(structured_mesh(6), 5);
  c.run([](RankContext &ctx) {
    EXPECT_EQ(allreduce_min(ctx, 10.0 - ctx.rank), 6.0);
    EXPECT_EQ(allreduce_sum(ctx, static_cast<double>(ctx.rank)), 10.0);
  });
}

TEST(Collectives, FailedPeerTimesOut) {
  Cluster c(structured_mesh(4), 2);
  EXPECT_THROW(c.run([](RankContext &ctx) {
                 if (ctx.rank == 1) throw IoError("rank 1 is gone");
                 Field u{Quantity::u, 0.0, std::vector<double>(ctx.sub->local_count(), 0.0)};
                 halo_exchange(ctx, u);
               }),
               Error);
}

TEST(RunSimulation, ZeroStepsWritesInitialState) {
  auto cfg = diffusion_config(2);
  cfg.steps = 0;
  cfg.output_dir = support::scratch_dir("zero_steps").string();
  const auto r = run_simulation(cfg);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(r.phases.convection, 0.0);
  EXPECT_EQ(r.phases.diffusion, 0.0);
  EXPECT_EQ(r.phases.linear_solver, 0.0);
  ASSERT_EQ(r.outputs.size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(r.outputs[0]));
  EXPECT_EQ(r.final_fields.at("u").size(), r.cells);
}

TEST(RunSimulation, DiffusionIsRankCountInvariant) {
  const auto ref = run_simulation(diffusion_config(1));
  const auto four = run_simulation(diffusion_config(4));
  EXPECT_LE(support::relative_inf_diff(four.final_fields.at("u"), ref.final_fields.at("u")), 1e-12);
  EXPECT_EQ(four.dt_min, ref.dt_min);
  EXPECT_EQ(four.final_time, ref.final_time);
}

TEST(RunSimulation, Deterministic) {
  auto cfg = diffusion_config(3);
  cfg.transport.velocity = {0.5, -0.25};
  const auto a = run_simulation(cfg);
  const auto b = run_simulation(cfg);
  EXPECT_EQ(a.final_fields, b.final_fields);
}

TEST(RunSimulation, StreamerReportsAllPhases) {
  SimulationConfig cfg;
  cfg.physics = Physics::streamer;
  cfg.grid = 12;
  cfg.ranks = 2;
  cfg.steps = 5;
  const auto r = run_simulation(cfg);
  EXPECT_GT(r.phases.convection, 0.0);
  EXPECT_GT(r.phases.diffusion, 0.0);
  EXPECT_GT(r.phases.linear_solver, 0.0);
  EXPECT_GT(r.phases.total, 0.0);
  EXPECT_LE(r.phases.convection + r.phases.diffusion + r.phases.linear_solver,
            1.05 * r.phases.total);
  EXPECT_EQ(r.factorizations, 1u);
  EXPECT_EQ(r.solves, 5u);
  for (const char *name : {"n_e", "n_i", "potential"}) EXPECT_EQ(r.final_fields.at(name).size(), r.cells);
}

TEST(RunSimulation, CoupledVelocityFromPotential) {
  SimulationConfig cfg;
  cfg.physics = Physics::coupled;
  cfg.grid = 10;
  cfg.steps = 10;
  cfg.transport.diffusion = 0.01;
  cfg.poisson.source = 1.0;
  std::vector<std::vector<double>> u;
  for (int k : {1, 3}) {
    cfg.ranks = k;
    const auto r = run_simulation(cfg);
    EXPECT_EQ(r.solves, 10u);
    u.push_back(r.final_fields.at("u"));
    EXPECT_EQ(r.final_fields.at("potential").size(), r.cells);
  }
  EXPECT_LE(support::relative_inf_diff(u[1], u[0]), 1e-12);
}

TEST(RunSimulation, OutputCadence) {
  auto cfg = diffusion_config(2);
  cfg.steps = 7;
  cfg.output_every = 3;
  cfg.output_dir = support::scratch_dir("cadence").string();
  const auto r = run_simulation(cfg);
  std::vector<std::string> names;
  for (const auto &p : r.outputs) names.push_back(std::filesystem::path(p).filename().string());
  EXPECT_EQ(names, (std::vector<std::string>{"solution_000000.vtk", "solution_000003.vtk",
                                             "solution_000006.vtk", "solution_000007.vtk"}));
}

TEST(RunSimulation, ErrorsCarryRankStepAndPhase) {
  SimulationConfig cfg;
  cfg.grid = 4;
  cfg.ranks = 2;
  cfg.transport.diffusion = 0.0; // nothing moves and no explicit dt
  try {
    run_simulation(cfg);
    FAIL();
  } catch (const SimulationError &e) {
    EXPECT_EQ(e.error_class(), ErrorClass::config);
    EXPECT_EQ(e.step(), 1u);
    EXPECT_EQ(e.phase(), "time_step");
  }
  cfg.ranks = 0;
  EXPECT_THROW(run_simulation(cfg), InvalidK);
}

TEST(RunSimulation, PhaseTimersBoundedByTotal) {
  auto cfg = diffusion_config(2);
  const auto r = run_simulation(cfg);
  EXPECT_GT(r.phases.convection, 0.0);
  EXPECT_GT(r.phases.diffusion, 0.0);
  EXPECT_LE(r.phases.convection + r.phases.diffusion + r.phases.linear_solver,
            1.05 * r.phases.total);
}
