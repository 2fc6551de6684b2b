#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "oim/mdp.hpp"

namespace oim {

struct SuccessorCount {
  StateId next = 0;
  std::uint64_t count = 0;
  double reward_sum = 0.0;
};

/// Real-experience counters n(x,a), n(x,a,y) and reward sums c(x,a,y), with
/// predecessor lists that mirror the nonzero n(x,a,y) entries.
class TransitionCounts {
 public:
  TransitionCounts() = default;
  TransitionCounts(std::size_t n_states, std::size_t n_actions);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  void record(StateId x, ActionId a, StateId y, double reward);

  std::uint64_t visits(StateId x, ActionId a) const { return visits_[x * n_actions_ + a]; }
  /// Successors with nonzero count, in first-seen order.
  std::span<const SuccessorCount> successors(StateId x, ActionId a) const {
    return successors_[x * n_actions_ + a];
  }
  std::uint64_t count(StateId x, ActionId a, StateId y) const;
  double reward_sum(StateId x, ActionId a, StateId y) const;
  /// Pairs (x,a) with n(x,a,y) > 0.
  std::span<const StateAction> predecessors(StateId y) const { return predecessors_[y]; }

  std::uint64_t total_steps() const noexcept { return total_; }

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> visits_;
  std::vector<std::vector<SuccessorCount>> successors_;
  std::vector<std::vector<StateAction>> predecessors_;
};

/// Greedy policy of the maximum-likelihood model built from real experience
/// alone. Untried pairs are never chosen while a tried one exists; states
/// with no experience keep action 0 and value 0.
std::vector<ActionId> certainty_equivalence_policy(const TransitionCounts& counts, double gamma,
                                                   double tolerance = 1e-8,
                                                   std::size_t max_sweeps = 100'000);

struct ModelOptions {
  /// Proof-mode freeze: each pair accepts at most this many real updates.
  std::optional<std::uint64_t> update_cap;
  /// Accept negative rewards (tasks with step costs). Off by default.
  bool allow_negative_rewards = false;
};

/// Exploration reward: R_max on transitions into the Eden state, else 0.
/// Fixed for the lifetime of a model.
constexpr double exploration_reward(StateId y, StateId eden, double r_max) noexcept {
  return y == eden ? r_max : 0.0;
}

/// Counters over X extended with the Garden-of-Eden state x_E (index |X|).
///
/// Every pair starts with one fictitious visit that led to x_E, so
/// N(x,a) = n_real(x,a) + 1 and N(x,a,x_E) = 1 for the whole run. The
/// induced model P^ = N(x,a,y)/N(x,a), R^ = C(x,a,y)/N(x,a,y) is therefore
/// defined everywhere, and P^(x,a,x_E) = 1/(k+1) after k real visits.
class ExtendedCountsModel {
 public:
  static ExtendedCountsModel init_optimistic(std::size_t n_states, std::size_t n_actions,
                                             double gamma, double r_max, ModelOptions opts = {});

  std::size_t n_states() const noexcept { return counts_.n_states(); }
  std::size_t n_actions() const noexcept { return counts_.n_actions(); }
  StateId eden() const noexcept { return counts_.n_states(); }
  double gamma() const noexcept { return gamma_; }
  double r_max() const noexcept { return r_max_; }
  /// R_max / (1 - gamma), the value of staying in Eden forever.
  double v_max() const noexcept { return r_max_ / (1.0 - gamma_); }
  const ModelOptions& options() const noexcept { return opts_; }

  /// Returns false when the update cap froze this pair (counters untouched).
  bool record_transition(StateId x, ActionId a, StateId y, double reward);

  /// N(x,a). x may be Eden.
  std::uint64_t n_sa(StateId x, ActionId a) const;
  /// N(x,a,y). Either index may be Eden.
  std::uint64_t n_say(StateId x, ActionId a, StateId y) const;
  /// C(x,a,y); zero whenever N(x,a,y) is.
  double c_say(StateId x, ActionId a, StateId y) const;
  /// Real visits N(x,a) - 1.
  std::uint64_t experience(StateId x, ActionId a) const;

  double p_hat(StateId x, ActionId a, StateId y) const;
  /// C/N, or 0 for a never-seen successor.
  double r_hat(StateId x, ActionId a, StateId y) const;

  /// Pairs with at least m real visits, in (x,a) order.
  std::vector<StateAction> known_pairs(std::uint64_t m) const;

  /// (|X|+1)-state MDP with transitions P^, mean rewards R^ + R^e and an
  /// absorbing Eden state paying R_max per step.
  TabularMdp to_extended_mdp() const;

  const TransitionCounts& counts() const noexcept { return counts_; }

  nlohmann::json snapshot() const;
  static ExtendedCountsModel from_snapshot(const nlohmann::json& j);

 private:
  ExtendedCountsModel(std::size_t n_states, std::size_t n_actions, double gamma, double r_max,
                      ModelOptions opts);
  void check_pair(StateId x, ActionId a, bool allow_eden) const;

  TransitionCounts counts_;
  double gamma_ = 0.0;
  double r_max_ = 0.0;
  ModelOptions opts_;
};

}  // namespace oim
