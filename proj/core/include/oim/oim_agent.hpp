#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "oim/agent.hpp"
#include "oim/empirical_model.hpp"
#include "oim/mdp.hpp"
#include "oim/priority_sweep.hpp"
#include "oim/rng.hpp"

namespace oim {

enum class TieBreak { lowest_index, seeded_random };

/// Value tables of the optimistic-initial-model learner: q_r accumulates
/// external reward, q_e the exploration reward flowing from Eden. The agent
/// acts greedily on q_r + q_e.
struct DualQ {
  QTable q_r;
  QTable q_e;

  /// q_r = 0, q_e = v_max everywhere.
  static DualQ initial(std::size_t n_states, std::size_t n_actions, double v_max);

  double combined(StateId x, ActionId a) const { return q_r(x, a) + q_e(x, a); }
  /// argmax_a (q_r + q_e)(x,a), lowest index on ties.
  ActionId greedy(StateId x) const;
};

struct OimConfig {
  double r_max = 1.0;
  double gamma = 0.95;
  SweepKind sweep = SweepKind::prioritized;
  double priority_threshold = 1e-5;
  std::size_t max_backups_per_step = 1000;
  /// Cap on full sweeps per step when sweep == full.
  std::size_t max_full_sweeps = 100'000;
  TieBreak tie_break = TieBreak::lowest_index;
  /// Modified-OIM counter freeze (proof mode only).
  std::optional<std::uint64_t> update_cap;
  bool allow_negative_rewards = false;

  void validate() const;
};

struct BackupPair {
  double q_r = 0.0;
  double q_e = 0.0;
};

/// Greedy action on q_r + q_e. seeded_random draws uniformly among exact
/// ties and needs rng.
ActionId select_action(const DualQ& dual, StateId x, TieBreak tie_break, Rng* rng = nullptr);

/// The two dynamic-programming equations at (x,a):
///   q_r' = sum_{y in X} P^(x,a,y) (R^(x,a,y) + gamma q_r(y,a_y))
///   q_e' = gamma sum_{y in X} P^(x,a,y) q_e(y,a_y) + P^(x,a,x_E) V_max
/// with a_y the greedy action of the combined table.
BackupPair dp_backup_pair(const ExtendedCountsModel& model, const DualQ& dual, StateId x,
                          ActionId a);

/// One synchronous sweep of dp_backup_pair over every pair.
DualQ dual_sweep(const ExtendedCountsModel& model, const DualQ& dual);

/// (1/N(x,a)) (V_max - (q_r + q_e)(x,a)): the exploration bonus OIM pays
/// implicitly for a visit of (x,a). Diagnostic only.
double implicit_bonus(const ExtendedCountsModel& model, const DualQ& dual, StateId x, ActionId a);

/// The optimistic-initial-model learner.
///
/// Each step records the transition in the counts model, then runs the dual
/// DP over the update set L_t (all states to convergence, or prioritized
/// sweeping starting at x_t) and acts greedily on the result. There is no
/// random exploration; the Eden state is the only source of exploration.
class OimAgent final : public Agent {
 public:
  OimAgent(std::size_t n_states, std::size_t n_actions, OimConfig cfg, std::uint64_t seed = 0);

  std::string_view kind() const override { return "oim"; }
  double q_estimate(StateId x, ActionId a) const override { return dual_.combined(x, a); }
  ActionId greedy_action(StateId x, bool include_exploration) const override;
  std::vector<ActionId> evaluation_actions(bool include_exploration) const override;

  /// observe(x, a, r, y) followed by select_action(y).
  ActionId step(StateId x, ActionId a, double reward, StateId next);

  const OimConfig& config() const noexcept { return cfg_; }
  const ExtendedCountsModel& model() const noexcept { return model_; }
  const DualQ& values() const noexcept { return dual_; }
  const PrioritySweeper& sweeper() const noexcept { return sweeper_; }
  double v_max() const noexcept { return model_.v_max(); }
  double implicit_bonus(StateId x, ActionId a) const {
    return oim::implicit_bonus(model_, dual_, x, a);
  }

  /// Backs up every action of x in place; returns the larger of the changes
  /// in q_r(x,a_x) and q_e(x,a_x).
  double backup_state(StateId x);

 protected:
  ActionId choose(StateId x) override;
  std::pair<std::size_t, double> learn(StateId x, ActionId a, double reward,
                                       StateId next) override;
  void restart(std::uint64_t seed) override;

 private:
  OimConfig cfg_;
  ExtendedCountsModel model_;
  DualQ dual_;
  PrioritySweeper sweeper_;
  Rng rng_;
  std::vector<ActionId> greedy_;  // argmax of the combined table per state
};

}  // namespace oim
