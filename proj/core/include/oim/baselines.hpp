#pragma once

// Comparison learners sharing the Agent contract.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oim/agent.hpp"
#include "oim/empirical_model.hpp"
#include "oim/priority_sweep.hpp"
#include "oim/rng.hpp"

namespace oim {

// ---------------------------------------------------------------- Q-learning

enum class Exploration { epsilon_greedy, boltzmann, greedy };

struct QLearningConfig {
  double alpha = 0.1;
  double gamma = 0.95;
  double q0 = 0.0;
  Exploration exploration = Exploration::epsilon_greedy;
  double epsilon = 0.1;
  double temperature = 1.0;

  void validate() const;
};

/// softmax(q / T), shifted by max(q) for stability.
std::vector<double> boltzmann_probabilities(std::span<const double> q, double temperature);

/// Tabular Q-learning with constant step size:
///   Q(x,a) += alpha (r + gamma max_a' Q(y,a') - Q(x,a))
/// Covers epsilon-greedy, Boltzmann and optimistic-initial-values (greedy
/// from a high q0) exploration.
class QLearningAgent final : public Agent {
 public:
  QLearningAgent(std::size_t n_states, std::size_t n_actions, QLearningConfig cfg,
                 std::uint64_t seed = 0);

  std::string_view kind() const override;
  double q_estimate(StateId x, ActionId a) const override { return q_(x, a); }
  const QTable& table() const noexcept { return q_; }
  const QLearningConfig& config() const noexcept { return cfg_; }

 protected:
  ActionId choose(StateId x) override;
  std::pair<std::size_t, double> learn(StateId x, ActionId a, double reward,
                                       StateId next) override;
  void restart(std::uint64_t seed) override;

 private:
  QLearningConfig cfg_;
  QTable q_;
  Rng rng_;
};

// ---------------------------------------------------------------- R-max

struct RmaxConfig {
  std::uint64_t m_known = 5;
  double r_max = 1.0;
  double gamma = 0.95;
  double tolerance = 1e-6;
  bool allow_negative_rewards = false;

  void validate() const;
};

/// R-max: every pair leads to the maximum-reward absorbing state until it
/// has been tried m_known times; then its empirical model (real successors
/// only) replaces it and the whole model is re-solved.
class RmaxAgent final : public Agent {
 public:
  RmaxAgent(std::size_t n_states, std::size_t n_actions, RmaxConfig cfg);

  std::string_view kind() const override { return "rmax"; }
  double q_estimate(StateId x, ActionId a) const override { return q_(x, a); }

  bool known(StateId x, ActionId a) const { return model_.experience(x, a) >= cfg_.m_known; }
  /// Known-pair transition estimate n(x,a,y) / n(x,a), Eden visit excluded.
  double p_known(StateId x, ActionId a, StateId y) const;
  const ExtendedCountsModel& model() const noexcept { return model_; }
  std::size_t solves() const noexcept { return solves_; }

 protected:
  ActionId choose(StateId x) override { return q_.argmax(x); }
  std::pair<std::size_t, double> learn(StateId x, ActionId a, double reward,
                                       StateId next) override;
  void restart(std::uint64_t seed) override;

 private:
  double solve();

  RmaxConfig cfg_;
  ExtendedCountsModel model_;
  QTable q_;
  std::size_t solves_ = 0;
};

// ---------------------------------------------------------------- MBIE-EB

enum class BonusShape { inverse, inverse_sqrt };

struct MbieEbConfig {
  double beta = 1.0;
  BonusShape shape = BonusShape::inverse_sqrt;
  double gamma = 0.95;
  /// Value of never-tried pairs; negative selects (r0_max + beta)/(1-gamma).
  double q_init = -1.0;
  double r0_max = 1.0;
  double tolerance = 1e-6;
  std::size_t max_sweeps = 100'000;

  void validate() const;
};

/// Model-based interval estimation, exploration-bonus form: value iteration
/// on the empirical model with beta/N (or beta/sqrt(N)) added to each
/// pair's expected reward, solved to tolerance after every step.
class MbieEbAgent final : public Agent {
 public:
  MbieEbAgent(std::size_t n_states, std::size_t n_actions, MbieEbConfig cfg);

  std::string_view kind() const override { return "mbie_eb"; }
  double q_estimate(StateId x, ActionId a) const override { return q_(x, a); }
  double bonus(StateId x, ActionId a) const;
  const TransitionCounts& counts() const noexcept { return counts_; }

 protected:
  ActionId choose(StateId x) override { return q_.argmax(x); }
  std::pair<std::size_t, double> learn(StateId x, ActionId a, double reward,
                                       StateId next) override;
  void restart(std::uint64_t seed) override;

 private:
  double backup_state(StateId x);

  MbieEbConfig cfg_;
  double q_init_;
  TransitionCounts counts_;
  QTable q_;
};

// ---------------------------------------------------------------- bonus agents

enum class BonusKind { none, frequency, recency, error };

BonusKind parse_bonus_kind(const std::string& name);
std::string to_string(BonusKind kind);

struct BonusConfig {
  BonusKind kind = BonusKind::frequency;
  double kappa = 1.0;
  double alpha = 1.0;
  double gamma = 0.95;
  /// Probability of a uniformly random action (model-based epsilon-greedy).
  double epsilon = 0.0;
  /// Value of q_r for never-tried pairs.
  double q0 = 0.0;
  SweepKind sweep = SweepKind::prioritized;
  double priority_threshold = 1e-5;
  std::size_t max_backups_per_step = 1000;
  std::size_t max_full_sweeps = 100'000;

  void validate() const;
};

/// Model-based learner with separate external (q_r) and bonus (q_e) values,
/// acting greedily on q_r + kappa q_e. The bonus stream is
///   frequency: -alpha n(x,a)
///   recency:   alpha sqrt(t - last visit of (x,a))
///   error:     alpha |change of q_r(x,a) at its last backup|
/// Changing kappa takes effect on the next action without touching either
/// table. Propagation uses prioritized sweeping over the empirical model.
class BonusAgent final : public Agent {
 public:
  BonusAgent(std::size_t n_states, std::size_t n_actions, BonusConfig cfg, std::uint64_t seed = 0);

  std::string_view kind() const override;
  double q_estimate(StateId x, ActionId a) const override {
    return q_r_(x, a) + cfg_.kappa * q_e_(x, a);
  }
  ActionId greedy_action(StateId x, bool include_exploration) const override;
  std::vector<ActionId> evaluation_actions(bool include_exploration) const override;

  void set_kappa(double kappa);
  double kappa() const noexcept { return cfg_.kappa; }
  /// Current bonus b_t(x,a).
  double bonus(StateId x, ActionId a) const;
  const QTable& q_r() const noexcept { return q_r_; }
  const QTable& q_e() const noexcept { return q_e_; }
  const TransitionCounts& counts() const noexcept { return counts_; }

 protected:
  ActionId choose(StateId x) override;
  std::pair<std::size_t, double> learn(StateId x, ActionId a, double reward,
                                       StateId next) override;
  void restart(std::uint64_t seed) override;

 private:
  ActionId combined_greedy(StateId x) const;
  double backup_state(StateId x);

  BonusConfig cfg_;
  TransitionCounts counts_;
  QTable q_r_;
  QTable q_e_;
  std::vector<std::uint64_t> last_visit_;
  std::vector<double> last_error_;
  PrioritySweeper sweeper_;
  Rng rng_;
};

}  // namespace oim
