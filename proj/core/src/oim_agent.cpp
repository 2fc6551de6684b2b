#include "oim/oim_agent.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "oim/errors.hpp"

namespace oim {

DualQ DualQ::initial(std::size_t n_states, std::size_t n_actions, double v_max) {
  return {QTable(n_states, n_actions, 0.0), QTable(n_states, n_actions, v_max)};
}

ActionId DualQ::greedy(StateId x) const {
  ActionId best = 0;
  double best_v = combined(x, 0);
  for (ActionId a = 1; a < q_r.n_actions(); ++a) {
    const double v = combined(x, a);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

void OimConfig::validate() const {
  if (!(r_max >= 0.0)) throw UsageError("r_max must be nonnegative");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("discount must lie in [0,1)");
  if (!(priority_threshold > 0.0)) throw UsageError("priority threshold must be positive");
  if (max_backups_per_step < 1) throw UsageError("max_backups_per_step must be >= 1");
  if (max_full_sweeps < 1) throw UsageError("max_full_sweeps must be >= 1");
}

ActionId select_action(const DualQ& dual, StateId x, TieBreak tie_break, Rng* rng) {
  if (x >= dual.q_r.n_states()) throw UsageError("state out of range");
  const ActionId best = dual.greedy(x);
  if (tie_break == TieBreak::lowest_index) return best;
  if (rng == nullptr) throw UsageError("seeded_random tie-break needs a random stream");
  const double top = dual.combined(x, best);
  std::vector<ActionId> ties;
  for (ActionId a = 0; a < dual.q_r.n_actions(); ++a)
    if (dual.combined(x, a) == top) ties.push_back(a);
  return ties.size() == 1 ? best : ties[rng->below(ties.size())];
}

BackupPair dp_backup_pair(const ExtendedCountsModel& model, const DualQ& dual, StateId x,
                          ActionId a) {
  const double g = model.gamma();
  const double n = static_cast<double>(model.n_sa(x, a));
  BackupPair out;
  double future_e = 0.0;
  for (const SuccessorCount& s : model.counts().successors(x, a)) {
    const double p = static_cast<double>(s.count) / n;
    const ActionId ay = dual.greedy(s.next);
    out.q_r += p * (s.reward_sum / static_cast<double>(s.count) + g * dual.q_r(s.next, ay));
    future_e += p * dual.q_e(s.next, ay);
  }
  out.q_e = g * future_e + model.v_max() / n;
  return out;
}

DualQ dual_sweep(const ExtendedCountsModel& model, const DualQ& dual) {
  DualQ next = dual;
  for (StateId x = 0; x < model.n_states(); ++x)
    for (ActionId a = 0; a < model.n_actions(); ++a) {
      const BackupPair b = dp_backup_pair(model, dual, x, a);
      next.q_r(x, a) = b.q_r;
      next.q_e(x, a) = b.q_e;
    }
  return next;
}

double implicit_bonus(const ExtendedCountsModel& model, const DualQ& dual, StateId x, ActionId a) {
  return (model.v_max() - dual.combined(x, a)) / static_cast<double>(model.n_sa(x, a));
}

// ---------------------------------------------------------------- OimAgent

namespace {

ModelOptions model_options(const OimConfig& cfg) {
  ModelOptions o;
  o.update_cap = cfg.update_cap;
  o.allow_negative_rewards = cfg.allow_negative_rewards;
  return o;
}

}  // namespace

OimAgent::OimAgent(std::size_t n_states, std::size_t n_actions, OimConfig cfg,
                   std::uint64_t seed)
    : Agent(n_states, n_actions),
      cfg_((cfg.validate(), cfg)),
      model_(ExtendedCountsModel::init_optimistic(n_states, n_actions, cfg.gamma, cfg.r_max,
                                                  model_options(cfg))),
      dual_(DualQ::initial(n_states, n_actions, model_.v_max())),
      sweeper_(n_states, cfg.priority_threshold, cfg.max_backups_per_step),
      rng_(seed),
      greedy_(n_states, 0) {}

void OimAgent::restart(std::uint64_t seed) {
  model_ = ExtendedCountsModel::init_optimistic(n_states(), n_actions(), cfg_.gamma, cfg_.r_max,
                                                model_options(cfg_));
  dual_ = DualQ::initial(n_states(), n_actions(), model_.v_max());
  sweeper_ = PrioritySweeper(n_states(), cfg_.priority_threshold, cfg_.max_backups_per_step);
  rng_.seed(seed);
  std::fill(greedy_.begin(), greedy_.end(), 0);
}

ActionId OimAgent::choose(StateId x) { return oim::select_action(dual_, x, cfg_.tie_break, &rng_); }

ActionId OimAgent::greedy_action(StateId x, bool include_exploration) const {
  return include_exploration ? dual_.greedy(x) : dual_.q_r.argmax(x);
}

std::vector<ActionId> OimAgent::evaluation_actions(bool include_exploration) const {
  if (include_exploration) return Agent::evaluation_actions(true);
  return certainty_equivalence_policy(model_.counts(), cfg_.gamma);
}

double OimAgent::backup_state(StateId x) {
  const ActionId before = greedy_[x];
  const double old_r = dual_.q_r(x, before);
  const double old_e = dual_.q_e(x, before);
  const auto& counts = model_.counts();
  const double g = model_.gamma();

  // Same equations as dp_backup_pair; a_y comes from greedy_, which always
  // matches the current combined table.
  thread_local std::vector<BackupPair> fresh;
  fresh.resize(n_actions());
  for (ActionId a = 0; a < n_actions(); ++a) {
    const double n = static_cast<double>(counts.visits(x, a) + 1);
    double r = 0.0, e = 0.0;
    for (const SuccessorCount& s : counts.successors(x, a)) {
      const double p = static_cast<double>(s.count) / n;
      const ActionId ay = greedy_[s.next];
      r += p * (s.reward_sum / static_cast<double>(s.count) + g * dual_.q_r(s.next, ay));
      e += p * dual_.q_e(s.next, ay);
    }
    fresh[a] = {r, g * e + model_.v_max() / n};
  }
  for (ActionId a = 0; a < n_actions(); ++a) {
    dual_.q_r(x, a) = fresh[a].q_r;
    dual_.q_e(x, a) = fresh[a].q_e;
  }
  greedy_[x] = dual_.greedy(x);

  const ActionId after = greedy_[x];
  return std::max(std::abs(dual_.q_r(x, after) - old_r), std::abs(dual_.q_e(x, after) - old_e));
}

std::pair<std::size_t, double> OimAgent::learn(StateId x, ActionId a, double reward,
                                               StateId next) {
  model_.record_transition(x, a, next, reward);
  auto backup = [this](StateId s) { return backup_state(s); };

  if (cfg_.sweep == SweepKind::full) {
    const auto [sweeps, largest] =
        sweep_until_converged(n_states(), cfg_.priority_threshold, cfg_.max_full_sweeps, backup);
    return {sweeps * n_states(), largest};
  }
  auto weight = [this](StateId px, ActionId pa, StateId y) {
    const auto& c = model_.counts();
    return static_cast<double>(c.count(px, pa, y)) / static_cast<double>(c.visits(px, pa) + 1);
  };
  const SweepStats stats = sweeper_.run(x, model_.counts(), backup, weight);
  return {stats.backups, stats.max_priority};
}

ActionId OimAgent::step(StateId x, ActionId a, double reward, StateId next) {
  observe(x, a, reward, next);
  return select_action(next);
}

}  // namespace oim
