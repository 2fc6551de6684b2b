#include <gtest/gtest.h>

#include <set>

#include "oim/environments.hpp"
#include "oim/errors.hpp"
#include "oim/oim_agent.hpp"
#include "oracles.hpp"

using namespace oim;

namespace {

ExtendedCountsModel random_model(Rng& rng, std::size_t n, std::size_t k, double gamma,
                                 double r_max, int steps) {
  auto m = ExtendedCountsModel::init_optimistic(n, k, gamma, r_max);
  for (int t = 0; t < steps; ++t)
    m.record_transition(rng.below(n), rng.below(k), rng.below(n), rng.uniform());
  return m;
}

DualQ random_dual(Rng& rng, std::size_t n, std::size_t k, double scale) {
  DualQ d{QTable(n, k), QTable(n, k)};
  for (StateId x = 0; x < n; ++x)
    for (ActionId a = 0; a < k; ++a) {
      d.q_r(x, a) = scale * rng.uniform();
      d.q_e(x, a) = scale * rng.uniform();
    }
  return d;
}

// drives an agent on an environment for `steps` steps
template <class A>
void drive(A& agent, const Environment& env, std::uint64_t seed, std::size_t steps) {
  EnvInstance sim(env, seed);
  StateId x = sim.reset();
  for (std::size_t t = 0; t < steps; ++t) {
    const ActionId a = agent.select_action(x);
    const auto s = sim.step(a);
    agent.observe(x, a, s.reward, s.next);
    x = s.next;
  }
}

}  // namespace

TEST(SelectAction, FreshAgentPicksActionZero) {
  OimAgent agent(3, 4, {.r_max = 1.0, .gamma = 0.9});
  for (StateId x = 0; x < 3; ++x) EXPECT_EQ(agent.select_action(x), 0u);
}

TEST(SelectAction, ArgmaxOfCombinedTable) {
  DualQ d{QTable(1, 3), QTable(1, 3)};
  d.q_r(0, 0) = 1;
  d.q_r(0, 1) = 1;
  d.q_e(0, 1) = 2;
  d.q_e(0, 2) = 2;
  EXPECT_EQ(select_action(d, 0, TieBreak::lowest_index), 1u);
}

TEST(SelectAction, ShiftingExplorationTableKeepsChoices) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    DualQ d = random_dual(rng, 4, 3, 10.0);
    std::vector<ActionId> before;
    for (StateId x = 0; x < 4; ++x) before.push_back(select_action(d, x, TieBreak::lowest_index));
    const double c = 100.0 * rng.uniform();
    for (StateId x = 0; x < 4; ++x)
      for (ActionId a = 0; a < 3; ++a) d.q_e(x, a) += c;
    for (StateId x = 0; x < 4; ++x)
      EXPECT_EQ(select_action(d, x, TieBreak::lowest_index), before[x]);
  }
}

TEST(SelectAction, SeededRandomStaysWithinTies) {
  DualQ d{QTable(1, 4), QTable(1, 4)};
  d.q_e(0, 1) = d.q_e(0, 3) = 5.0;
  Rng rng(2);
  std::set<ActionId> seen;
  for (int i = 0; i < 200; ++i) seen.insert(select_action(d, 0, TieBreak::seeded_random, &rng));
  EXPECT_EQ(seen, (std::set<ActionId>{1, 3}));
}

TEST(DpBackup, FreshModelGivesVmax) {
  const auto m = ExtendedCountsModel::init_optimistic(3, 2, 0.9, 5.0);
  const auto d = DualQ::initial(3, 2, m.v_max());
  const auto b = dp_backup_pair(m, d, 1, 1);
  EXPECT_EQ(b.q_r, 0.0);
  EXPECT_DOUBLE_EQ(b.q_e, m.v_max());
}

TEST(DpBackup, HandEvaluatedSingleTransition) {
  const double g = 0.9;
  auto m = ExtendedCountsModel::init_optimistic(2, 1, g, 2.0);
  m.record_transition(0, 0, 1, 1.0);
  const double v = m.v_max();
  const auto d = DualQ::initial(2, 1, v);
  const auto b = dp_backup_pair(m, d, 0, 0);
  EXPECT_DOUBLE_EQ(b.q_r, 0.5);
  EXPECT_DOUBLE_EQ(b.q_e, 0.5 * g * v + 0.5 * v);
}

TEST(Decomposition, DualBackupEqualsExtendedBellmanBackup) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(6), k = 1 + rng.below(3);
    const auto m = random_model(rng, n, k, 0.3 + 0.6 * rng.uniform(), 0.5 + rng.uniform(),
                                static_cast<int>(rng.below(80)));
    const auto d = random_dual(rng, n, k, 5.0);
    const auto ext = m.to_extended_mdp();
    // extended table: combined values, Eden fixed at V_max
    QTable q(n + 1, k, m.v_max());
    for (StateId x = 0; x < n; ++x)
      for (ActionId a = 0; a < k; ++a) q(x, a) = d.combined(x, a);
    for (StateId x = 0; x < n; ++x)
      for (ActionId a = 0; a < k; ++a) {
        const auto b = dp_backup_pair(m, d, x, a);
        EXPECT_NEAR(b.q_r + b.q_e, bellman_backup(ext, q, x, a), 1e-12);
      }
  }
}

// every pair of a two-state task within two visits per pair plus travel
TEST(Coverage, DeterministicTwoStateTaskTriesEveryPairQuickly) {
  const auto mdp = std::make_shared<TabularMdp>(TabularMdp::Builder(2, 2, 0.9, 1.0)
                                                    .add(0, 0, 0, 1.0, 0.1)
                                                    .add(0, 1, 1, 1.0)
                                                    .add(1, 0, 0, 1.0)
                                                    .add(1, 1, 1, 1.0, 1.0)
                                                    .build());
  const Environment env{"two", mdp, 0, {}};
  OimAgent agent(2, 2, {.r_max = 100.0, .gamma = 0.9, .sweep = SweepKind::full});
  EnvInstance sim(env, 1);
  StateId x = sim.reset();
  std::set<std::pair<StateId, ActionId>> tried;
  for (int t = 0; t < 6; ++t) {
    const ActionId a = agent.select_action(x);
    tried.insert({x, a});
    const auto s = sim.step(a);
    agent.observe(x, a, s.reward, s.next);
    x = s.next;
  }
  EXPECT_EQ(tried.size(), 4u);
}

TEST(Degenerate, ZeroRmaxLeavesNoExplorationValue) {
  const auto env = chain(0.2, 0.9);
  OimAgent agent(5, 2, {.r_max = 0.0, .gamma = 0.9, .sweep = SweepKind::full});
  drive(agent, env, 4, 1);
  for (StateId x = 0; x < 5; ++x)
    for (ActionId a = 0; a < 2; ++a) EXPECT_EQ(agent.values().q_e(x, a), 0.0);
}

TEST(ImplicitBonus, Examples) {
  auto m = ExtendedCountsModel::init_optimistic(1, 1, 0.5, 1.0);
  auto d = DualQ::initial(1, 1, m.v_max());
  EXPECT_EQ(implicit_bonus(m, d, 0, 0), 0.0);
  m.record_transition(0, 0, 0, 0.0);
  d.q_r(0, 0) = 0.0;
  d.q_e(0, 0) = m.v_max() / 2;
  EXPECT_DOUBLE_EQ(implicit_bonus(m, d, 0, 0), m.v_max() / 4);
}

TEST(Invariants, FullSweepStaysBelowVmaxAndExplorationStaysNonnegative) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto truth = std::make_shared<TabularMdp>(oracle::random_mdp(rng, 5, 2, 0.9));
    const Environment env{"rand", truth, 0, {}};
    OimAgent agent(5, 2, {.r_max = 2.0, .gamma = 0.9, .sweep = SweepKind::full,
                          .priority_threshold = 1e-9});
    EnvInstance sim(env, trial);
    StateId x = sim.reset();
    for (int t = 0; t < 300; ++t) {
      const ActionId a = agent.select_action(x);
      const auto s = sim.step(a);
      agent.observe(x, a, s.reward, s.next);
      x = s.next;
      for (StateId u = 0; u < 5; ++u)
        for (ActionId b = 0; b < 2; ++b) {
          EXPECT_LE(agent.values().combined(u, b), agent.v_max() + 1e-9);
          EXPECT_GE(agent.values().q_e(u, b), 0.0);
        }
    }
  }
}

// same behaviour stream for both agents as long as their choices agree
TEST(Sweeps, PrioritizedMatchesFullOnChainAndLoop) {
  for (const auto& env : {chain(0.2, 0.9), loop_env(0.9)}) {
    const std::size_t n = env.mdp->n_states();
    OimConfig full{.r_max = 1.0, .gamma = 0.9, .sweep = SweepKind::full,
                   .priority_threshold = 1e-9};
    OimConfig ps = full;
    ps.sweep = SweepKind::prioritized;
    ps.priority_threshold = 1e-6;
    ps.max_backups_per_step = 100000;
    OimAgent a(n, 2, full), b(n, 2, ps);
    EnvInstance sim(env, 7);
    StateId x = sim.reset();
    for (int t = 0; t < 3000; ++t) {
      const ActionId u = a.select_action(x);
      ASSERT_EQ(b.select_action(x), u) << env.name << " diverged at step " << t;
      const auto s = sim.step(u);
      a.observe(x, u, s.reward, s.next);
      b.observe(x, u, s.reward, s.next);
      x = s.next;
    }
    for (StateId s = 0; s < n; ++s) {
      EXPECT_EQ(a.greedy_action(s, true), b.greedy_action(s, true));
      for (ActionId u = 0; u < 2; ++u)
        EXPECT_NEAR(a.values().combined(s, u), b.values().combined(s, u), 1e-3);
    }
  }
}

TEST(Sweeps, CurrentStateIsAlwaysBackedUp) {
  const auto env = riverswim(0.9);
  OimAgent agent(6, 2, {.r_max = 10.0, .gamma = 0.9, .max_backups_per_step = 1});
  std::vector<StepTrace> trace;
  agent.set_trace_hook([&](const StepTrace& s) { trace.push_back(s); });
  drive(agent, env, 3, 200);
  ASSERT_EQ(trace.size(), 200u);
  for (const auto& s : trace) EXPECT_EQ(s.backups, 1u);
}

TEST(OimAgent, RestartForgetsEverything) {
  const auto env = riverswim(0.9);
  OimAgent agent(6, 2, {.r_max = 10.0, .gamma = 0.9});
  drive(agent, env, 3, 100);
  agent.reset(0);
  const OimAgent fresh(6, 2, {.r_max = 10.0, .gamma = 0.9});
  EXPECT_EQ(agent.values().q_r, fresh.values().q_r);
  EXPECT_EQ(agent.values().q_e, fresh.values().q_e);
  EXPECT_EQ(agent.model().snapshot(), fresh.model().snapshot());
}

TEST(OimConfig, RejectsBadValues) {
  EXPECT_THROW(OimAgent(2, 2, {.r_max = -1.0}), UsageError);
  EXPECT_THROW(OimAgent(2, 2, {.priority_threshold = 0.0}), UsageError);
  EXPECT_THROW(OimAgent(2, 2, {.max_backups_per_step = 0}), UsageError);
}
