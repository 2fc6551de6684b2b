#pragma once

// Exact finite MDPs and the dynamic-programming kernels that serve as the
// ground-truth oracle for every learner in the toolkit.

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace oim {

using StateId = std::size_t;
using ActionId = std::size_t;

struct StateAction {
  StateId x = 0;
  ActionId a = 0;
  friend auto operator<=>(const StateAction&, const StateAction&) = default;
};

/// One successor of a state-action pair: P(x,a,y) and mean reward R(x,a,y).
struct Outcome {
  StateId next = 0;
  double prob = 0.0;
  double reward = 0.0;
};

/// Dense table Q[x][a] in units of discounted reward.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t n_states, std::size_t n_actions, double fill = 0.0);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  double& operator()(StateId x, ActionId a) { return values_[x * n_actions_ + a]; }
  double operator()(StateId x, ActionId a) const { return values_[x * n_actions_ + a]; }

  std::span<double> row(StateId x) { return {values_.data() + x * n_actions_, n_actions_}; }
  std::span<const double> row(StateId x) const {
    return {values_.data() + x * n_actions_, n_actions_};
  }

  double max(StateId x) const;
  /// Greedy action; ties go to the lowest index.
  ActionId argmax(StateId x) const;

  /// Sup-norm distance; shapes must match.
  double sup_distance(const QTable& other) const;

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> values_;
};

/// Stationary stochastic policy pi[x][a]. Rows sum to one.
class Policy {
 public:
  Policy() = default;

  static Policy uniform(std::size_t n_states, std::size_t n_actions);
  static Policy deterministic(std::span<const ActionId> actions, std::size_t n_actions);
  static Policy greedy(const QTable& q);
  /// Validates shape, nonnegativity and row sums (1e-12).
  static Policy from_table(std::size_t n_states, std::size_t n_actions,
                           std::vector<double> probs);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double prob(StateId x, ActionId a) const { return probs_[x * n_actions_ + a]; }
  std::span<const double> row(StateId x) const {
    return {probs_.data() + x * n_actions_, n_actions_};
  }
  /// The action when row x is one-hot, otherwise nullopt.
  std::optional<ActionId> action(StateId x) const;

 private:
  Policy(std::size_t n_states, std::size_t n_actions, std::vector<double> probs)
      : n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {}

  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> probs_;
};

/// Finite MDP (X, A, P, R, gamma) with sparse transition rows.
///
/// Rewards are stored as means R(x,a,y); sampling noise, if any, belongs to
/// the environment front-end. Every instance is validated on construction:
/// rows are stochastic to 1e-12, rewards lie in [reward_floor, r0_max] and
/// terminal states are zero-reward self-loops.
class TabularMdp {
 public:
  class Builder;

  TabularMdp() = default;

  /// Builds from dense P[x][a][y] and R[x][a][y], both flattened row-major.
  static TabularMdp from_dense(std::size_t n_states, std::size_t n_actions, double gamma,
                               double r0_max, std::span<const double> transition,
                               std::span<const double> reward);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double gamma() const noexcept { return gamma_; }
  double r0_max() const noexcept { return r0_max_; }
  double reward_floor() const noexcept { return reward_floor_; }

  /// Successors of (x,a), sorted by state, zero-probability entries dropped.
  std::span<const Outcome> outcomes(StateId x, ActionId a) const;
  double p(StateId x, ActionId a, StateId y) const;
  double r(StateId x, ActionId a, StateId y) const;
  /// Sum_y P(x,a,y) R(x,a,y).
  double expected_reward(StateId x, ActionId a) const;

  const std::vector<StateId>& terminal_states() const noexcept { return terminals_; }

  TabularMdp with_gamma(double gamma) const;

  nlohmann::json to_json() const;
  static TabularMdp from_json(const nlohmann::json& j);

 private:
  friend class Builder;
  void validate() const;
  void check_indices(StateId x, ActionId a) const;

  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  double gamma_ = 0.0;
  double r0_max_ = 1.0;
  double reward_floor_ = 0.0;
  std::vector<std::size_t> row_begin_;  // size n_states*n_actions + 1
  std::vector<Outcome> outcomes_;
  std::vector<StateId> terminals_;
};

class TabularMdp::Builder {
 public:
  Builder(std::size_t n_states, std::size_t n_actions, double gamma, double r0_max);

  /// Lower reward bound. Defaults to 0; tasks with costs lower it explicitly.
  Builder& reward_floor(double floor);
  /// Adds probability mass to (x,a)->y. Repeated entries merge, and their
  /// rewards are averaged by probability.
  Builder& add(StateId x, ActionId a, StateId y, double prob, double reward = 0.0);
  Builder& terminal(StateId x);

  TabularMdp build() const;

 private:
  struct Entry {
    StateId x, y;
    ActionId a;
    double prob, reward;
  };
  std::size_t n_states_, n_actions_;
  double gamma_, r0_max_, floor_ = 0.0;
  std::vector<Entry> entries_;
  std::vector<StateId> terminals_;
};

/// Sum_y P(x,a,y) (R(x,a,y) + gamma max_a' q(y,a')).
double bellman_backup(const TabularMdp& mdp, const QTable& q, StateId x, ActionId a);

/// One synchronous (Jacobi) application of the Bellman optimality operator.
QTable bellman_sweep(const TabularMdp& mdp, const QTable& q);

/// Synchronous value iteration until the sweep-to-sweep sup-norm change is
/// at most tol. Throws ConvergenceError after max_iters sweeps.
QTable value_iteration(const TabularMdp& mdp, double tol = 1e-9, std::size_t max_iters = 1'000'000,
                       const QTable* warm_start = nullptr);

/// Q^pi from the linear fixed-point system, residual <= 1e-10 (relative to
/// the value scale). Direct LU up to 10^4 state-action pairs, Gauss-Seidel
/// beyond that.
QTable policy_evaluation_exact(const TabularMdp& mdp, const Policy& pi);

/// H-step truncated value: expected sum_{t=0..h} gamma^t r_t.
QTable truncated_value(const TabularMdp& mdp, const Policy& pi, std::size_t h);

/// Expected undiscounted reward of following pi for `steps` steps from start.
double expected_return(const TabularMdp& mdp, const Policy& pi, StateId start, std::size_t steps);

/// Maximum expected undiscounted `steps`-step return from start, by backward
/// finite-horizon DP (the policy may depend on the remaining horizon).
double optimal_finite_horizon_return(const TabularMdp& mdp, StateId start, std::size_t steps);

}  // namespace oim
