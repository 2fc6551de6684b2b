#include <benchmark/benchmark.h>

#include "oim/environments.hpp"
#include "oim/harness.hpp"
#include "oim/mdp.hpp"
#include "oim/oim_agent.hpp"

namespace {

oim::Environment small_maze() {
  return oim::make_environment("maze_with_subgoals", {{"width", 20}, {"height", 20}});
}

void BM_BellmanSweep(benchmark::State& state) {
  const auto env = small_maze();
  oim::QTable q(env.mdp->n_states(), env.mdp->n_actions());
  for (auto _ : state) {
    q = oim::bellman_sweep(*env.mdp, q);
    benchmark::DoNotOptimize(q);
  }
  state.SetItemsProcessed(state.iterations() * env.mdp->n_states() * env.mdp->n_actions());
}
BENCHMARK(BM_BellmanSweep);

void BM_ValueIteration(benchmark::State& state) {
  const auto env = oim::riverswim();
  for (auto _ : state) benchmark::DoNotOptimize(oim::value_iteration(*env.mdp, 1e-6));
}
BENCHMARK(BM_ValueIteration);

void BM_DualSweep(benchmark::State& state) {
  const auto env = oim::riverswim();
  oim::OimAgent agent(env.mdp->n_states(), env.mdp->n_actions(), {});
  oim::EnvInstance sim(env, 3);
  oim::StateId x = sim.reset();
  for (int t = 0; t < 2000; ++t) {
    const auto a = agent.select_action(x);
    const auto s = sim.step(a);
    agent.observe(x, a, s.reward, s.next);
    x = s.next;
  }
  auto dual = agent.values();
  for (auto _ : state) {
    dual = oim::dual_sweep(agent.model(), dual);
    benchmark::DoNotOptimize(dual);
  }
}
BENCHMARK(BM_DualSweep);

// one agent step including prioritized sweeping
void BM_OimStep(benchmark::State& state) {
  const auto env = small_maze();
  oim::OimConfig cfg;
  cfg.r_max = static_cast<double>(state.range(0));
  cfg.gamma = env.mdp->gamma();
  cfg.allow_negative_rewards = true;
  oim::OimAgent agent(env.mdp->n_states(), env.mdp->n_actions(), cfg);
  oim::EnvInstance sim(env, 5);
  oim::StateId x = sim.reset();
  for (auto _ : state) {
    const auto a = agent.select_action(x);
    const auto s = sim.step(a);
    agent.observe(x, a, s.reward, s.next);
    x = s.next;
  }
}
BENCHMARK(BM_OimStep)->Arg(40)->Arg(1000);

void BM_EnvStep(benchmark::State& state) {
  const auto env = small_maze();
  oim::EnvInstance sim(env, 9);
  oim::StateId x = sim.reset();
  oim::ActionId a = 0;
  for (auto _ : state) {
    x = sim.step(a).next;
    a = (a + 1) % 4;
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_EnvStep);

void BM_CertaintyEquivalence(benchmark::State& state) {
  const auto env = small_maze();
  oim::TransitionCounts counts(env.mdp->n_states(), env.mdp->n_actions());
  oim::EnvInstance sim(env, 11);
  oim::Rng rng(4);
  oim::StateId x = sim.reset();
  for (int t = 0; t < 20000; ++t) {
    const auto a = static_cast<oim::ActionId>(rng.below(4));
    const auto s = sim.step(a);
    counts.record(x, a, s.next, s.reward);
    x = s.next;
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(oim::certainty_equivalence_policy(counts, env.mdp->gamma()));
}
BENCHMARK(BM_CertaintyEquivalence);

}  // namespace

BENCHMARK_MAIN();
