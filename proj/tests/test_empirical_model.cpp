#include <gtest/gtest.h>

#include "oim/empirical_model.hpp"
#include "oim/environments.hpp"
#include "oim/errors.hpp"
#include "oracles.hpp"

using namespace oim;

TEST(InitOptimistic, EverythingLeadsToEden) {
  const auto m = ExtendedCountsModel::init_optimistic(2, 1, 0.9, 10.0);
  for (StateId x = 0; x < 2; ++x) {
    EXPECT_EQ(m.p_hat(x, 0, m.eden()), 1.0);
    for (StateId y = 0; y < 2; ++y) EXPECT_EQ(m.p_hat(x, 0, y), 0.0);
    EXPECT_EQ(m.n_sa(x, 0), 1u);
    EXPECT_EQ(m.n_say(x, 0, m.eden()), 1u);
  }
}

TEST(InitOptimistic, ExtendedOptimumIsVmax) {
  const auto m = ExtendedCountsModel::init_optimistic(2, 1, 0.9, 10.0);
  const auto q = value_iteration(m.to_extended_mdp(), 1e-11);
  for (StateId x = 0; x < 3; ++x) EXPECT_NEAR(q(x, 0), 100.0, 1e-8);
  EXPECT_DOUBLE_EQ(m.v_max(), 100.0);
}

TEST(InitOptimistic, RejectsBadArguments) {
  EXPECT_THROW(ExtendedCountsModel::init_optimistic(0, 1, 0.9, 1.0), UsageError);
  EXPECT_THROW(ExtendedCountsModel::init_optimistic(1, 0, 0.9, 1.0), UsageError);
  EXPECT_THROW(ExtendedCountsModel::init_optimistic(1, 1, 1.0, 1.0), UsageError);
  EXPECT_THROW(ExtendedCountsModel::init_optimistic(1, 1, 0.9, -1.0), UsageError);
}

TEST(RecordTransition, OneObservationSplitsMass) {
  auto m = ExtendedCountsModel::init_optimistic(2, 1, 0.9, 10.0);
  m.record_transition(0, 0, 1, 0.0);
  EXPECT_DOUBLE_EQ(m.p_hat(0, 0, m.eden()), 0.5);
  EXPECT_DOUBLE_EQ(m.p_hat(0, 0, 1), 0.5);
}

TEST(RecordTransition, RewardMeanAndProbability) {
  auto m = ExtendedCountsModel::init_optimistic(2, 1, 0.9, 10.0);
  m.record_transition(0, 0, 1, 5.0);
  m.record_transition(0, 0, 1, 5.0);
  EXPECT_DOUBLE_EQ(m.r_hat(0, 0, 1), 5.0);
  EXPECT_DOUBLE_EQ(m.p_hat(0, 0, 1), 2.0 / 3.0);
}

TEST(RecordTransition, UpdateCapFreezesPair) {
  auto m = ExtendedCountsModel::init_optimistic(2, 1, 0.9, 10.0, {.update_cap = 1});
  EXPECT_TRUE(m.record_transition(0, 0, 1, 1.0));
  const auto before = m.snapshot();
  EXPECT_FALSE(m.record_transition(0, 0, 0, 3.0));
  EXPECT_EQ(m.snapshot(), before);
}

TEST(RecordTransition, EdenMassDecaysAsOneOverKPlusOne) {
  auto m = ExtendedCountsModel::init_optimistic(3, 2, 0.9, 1.0);
  Rng rng(1);
  double last = 1.0;
  for (int k = 1; k <= 50; ++k) {
    m.record_transition(1, 1, rng.below(3), rng.uniform());
    const double p = m.p_hat(1, 1, m.eden());
    EXPECT_DOUBLE_EQ(p, 1.0 / (k + 1));
    EXPECT_LT(p, last);
    last = p;
  }
}

TEST(RecordTransition, RejectsNegativeRewardsAndEdenIndices) {
  auto m = ExtendedCountsModel::init_optimistic(2, 1, 0.9, 1.0);
  EXPECT_THROW(m.record_transition(0, 0, 1, -1.0), UsageError);
  EXPECT_THROW(m.record_transition(m.eden(), 0, 1, 0.0), UsageError);
  EXPECT_THROW(m.record_transition(0, 0, m.eden(), 0.0), UsageError);
  auto costs = ExtendedCountsModel::init_optimistic(2, 1, 0.9, 1.0, {.allow_negative_rewards = true});
  EXPECT_NO_THROW(costs.record_transition(0, 0, 1, -1.0));
}

TEST(Counters, ConservationUnderRandomStreams) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(6), k = 1 + rng.below(3);
    auto m = ExtendedCountsModel::init_optimistic(n, k, 0.9, 1.0);
    for (int t = 0; t < 300; ++t) m.record_transition(rng.below(n), rng.below(k), rng.below(n), rng.uniform());
    for (StateId x = 0; x < n; ++x)
      for (ActionId a = 0; a < k; ++a) {
        std::uint64_t sum = 0;
        for (StateId y = 0; y <= n; ++y) {
          sum += m.n_say(x, a, y);
          if (m.n_say(x, a, y) == 0) EXPECT_EQ(m.c_say(x, a, y), 0.0);
        }
        EXPECT_EQ(sum, m.n_sa(x, a));
        EXPECT_EQ(m.n_say(x, a, m.eden()), 1u);
      }
  }
}

TEST(PHat, Conventions) {
  auto m = ExtendedCountsModel::init_optimistic(2, 1, 0.9, 1.0);
  EXPECT_EQ(m.r_hat(0, 0, 1), 0.0);
  for (double r : {1.0, 2.0, 3.0}) m.record_transition(0, 0, 1, r);
  EXPECT_DOUBLE_EQ(m.r_hat(0, 0, 1), 2.0);
}

TEST(KnownPairs, CountsRealVisitsOnly) {
  auto m = ExtendedCountsModel::init_optimistic(2, 2, 0.9, 1.0);
  EXPECT_TRUE(m.known_pairs(1).empty());
  m.record_transition(0, 0, 1, 0.0);
  EXPECT_TRUE(m.known_pairs(2).empty());
  m.record_transition(0, 0, 1, 0.0);
  EXPECT_EQ(m.known_pairs(2), (std::vector<StateAction>{{0, 0}}));
  for (StateId x = 0; x < 2; ++x)
    for (ActionId a = 0; a < 2; ++a) m.record_transition(x, a, 0, 0.0);
  EXPECT_EQ(m.known_pairs(1).size(), 4u);
}

TEST(ExtendedMdp, EdenRowPaysRmaxForever) {
  auto m = ExtendedCountsModel::init_optimistic(3, 2, 0.8, 4.0);
  m.record_transition(0, 1, 2, 0.5);
  const auto ext = m.to_extended_mdp();
  ASSERT_EQ(ext.n_states(), 4u);
  for (ActionId a = 0; a < 2; ++a) {
    EXPECT_EQ(ext.p(3, a, 3), 1.0);
    EXPECT_EQ(ext.r(3, a, 3), 4.0);
  }
  EXPECT_DOUBLE_EQ(ext.p(0, 1, 2), 0.5);
  EXPECT_DOUBLE_EQ(ext.r(0, 1, 2), 0.5);
  EXPECT_DOUBLE_EQ(ext.r(0, 1, 3), 4.0);
}

TEST(ExtendedMdp, WellExploredDeterministicTaskApproachesTrueOptimum) {
  const auto env = loop_env(0.9);
  const auto& truth = *env.mdp;
  auto m = ExtendedCountsModel::init_optimistic(truth.n_states(), truth.n_actions(), 0.9, 2.0);
  for (int rep = 0; rep < 20000; ++rep)
    for (StateId x = 0; x < truth.n_states(); ++x)
      for (ActionId a = 0; a < truth.n_actions(); ++a) {
        const auto o = truth.outcomes(x, a)[0];
        m.record_transition(x, a, o.next, o.reward);
      }
  const auto q_true = value_iteration(truth, 1e-10);
  const auto q_ext = value_iteration(m.to_extended_mdp(), 1e-10);
  for (StateId x = 0; x < truth.n_states(); ++x)
    for (ActionId a = 0; a < truth.n_actions(); ++a)
      EXPECT_NEAR(q_ext(x, a), q_true(x, a), 0.01);
}

TEST(Snapshot, RoundTrip) {
  Rng rng(4);
  auto m = ExtendedCountsModel::init_optimistic(4, 2, 0.9, 3.0, {.update_cap = 7});
  for (int t = 0; t < 100; ++t) m.record_transition(rng.below(4), rng.below(2), rng.below(4), rng.uniform());
  const auto back = ExtendedCountsModel::from_snapshot(m.snapshot());
  EXPECT_EQ(back.snapshot(), m.snapshot());
  EXPECT_EQ(back.options().update_cap, std::optional<std::uint64_t>(7));
}

// Capped and uncapped models see the same stream; they must agree exactly on
// pairs that never reached the cap.
TEST(UpdateCap, AgreesWithUncappedOnUnknownPairs) {
  Rng rng(12);
  const std::uint64_t cap = 6;
  auto capped = ExtendedCountsModel::init_optimistic(5, 2, 0.9, 1.0, {.update_cap = cap});
  auto free = ExtendedCountsModel::init_optimistic(5, 2, 0.9, 1.0);
  for (int t = 0; t < 60; ++t) {
    const StateId x = rng.below(5), y = rng.below(5);
    const ActionId a = rng.below(2);
    const double r = rng.uniform();
    capped.record_transition(x, a, y, r);
    free.record_transition(x, a, y, r);
  }
  for (StateId x = 0; x < 5; ++x)
    for (ActionId a = 0; a < 2; ++a) {
      if (free.experience(x, a) > cap) {
        EXPECT_EQ(capped.experience(x, a), cap);
        continue;
      }
      for (StateId y = 0; y <= 5; ++y) {
        EXPECT_EQ(capped.p_hat(x, a, y), free.p_hat(x, a, y));
        EXPECT_EQ(capped.r_hat(x, a, y), free.r_hat(x, a, y));
      }
    }
}

TEST(CertaintyEquivalence, MatchesValueIterationOnTheMleModel) {
  Rng rng(30);
  const auto truth = oracle::random_mdp(rng, 5, 3, 0.9);
  TransitionCounts counts(5, 3);
  std::vector<double> p(5 * 3 * 5, 0.0), r(p.size(), 0.0);
  for (StateId x = 0; x < 5; ++x)
    for (ActionId a = 0; a < 3; ++a)
      for (int k = 0; k < 40; ++k) {
        const auto outs = truth.outcomes(x, a);
        std::vector<double> w;
        for (const auto& o : outs) w.push_back(o.prob);
        const auto& o = outs[rng.categorical(w)];
        counts.record(x, a, o.next, o.reward);
      }
  for (StateId x = 0; x < 5; ++x)
    for (ActionId a = 0; a < 3; ++a)
      for (const auto& s : counts.successors(x, a)) {
        const std::size_t i = (x * 3 + a) * 5 + s.next;
        p[i] = static_cast<double>(s.count) / counts.visits(x, a);
        r[i] = s.reward_sum / s.count;
      }
  const auto mle = TabularMdp::from_dense(5, 3, 0.9, 1.0, p, r);
  const auto best = oracle::brute_force_optimal_v(mle);
  const auto policy = certainty_equivalence_policy(counts, 0.9, 1e-12);
  const auto mine = oracle::evaluate(mle, oracle::deterministic(policy, 3));
  for (StateId x = 0; x < 5; ++x) EXPECT_NEAR(mine[x][policy[x]], best[x], 1e-7);
}

TEST(CertaintyEquivalence, NeverPicksUntriedPairs) {
  TransitionCounts counts(2, 3);
  counts.record(0, 2, 1, 0.0);
  counts.record(1, 1, 1, 0.0);
  const auto policy = certainty_equivalence_policy(counts, 0.9);
  EXPECT_EQ(policy[0], 2u);
  EXPECT_EQ(policy[1], 1u);
}
