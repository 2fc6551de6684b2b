#include <algorithm>
#include <cmath>

#include "oim/baselines.hpp"
#include "oim/errors.hpp"

namespace oim {

BonusKind parse_bonus_kind(const std::string& name) {
  if (name == "none") return BonusKind::none;
  if (name == "frequency") return BonusKind::frequency;
  if (name == "recency") return BonusKind::recency;
  if (name == "error") return BonusKind::error;
  throw UsageError("unknown bonus kind '" + name + "'");
}

std::string to_string(BonusKind kind) {
  switch (kind) {
    case BonusKind::none: return "none";
    case BonusKind::frequency: return "frequency";
    case BonusKind::recency: return "recency";
    case BonusKind::error: return "error";
  }
  return "unknown";
}

void BonusConfig::validate() const {
  if (!(kappa >= 0.0)) throw UsageError("kappa must be nonnegative");
  if (!(alpha >= 0.0)) throw UsageError("bonus scale alpha must be nonnegative");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("discount must lie in [0,1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw UsageError("epsilon must lie in [0,1]");
}

BonusAgent::BonusAgent(std::size_t n_states, std::size_t n_actions, BonusConfig cfg,
                       std::uint64_t seed)
    : Agent(n_states, n_actions),
      cfg_((cfg.validate(), cfg)),
      counts_(n_states, n_actions),
      q_r_(n_states, n_actions, cfg.q0),
      q_e_(n_states, n_actions, 0.0),
      last_visit_(n_states * n_actions, 0),
      last_error_(n_states * n_actions, 0.0),
      sweeper_(n_states, cfg.priority_threshold, cfg.max_backups_per_step),
      rng_(seed) {}

std::string_view BonusAgent::kind() const {
  return cfg_.kind == BonusKind::none ? "epsilon_greedy" : "bonus";
}

void BonusAgent::restart(std::uint64_t seed) {
  counts_ = TransitionCounts(n_states(), n_actions());
  q_r_ = QTable(n_states(), n_actions(), cfg_.q0);
  q_e_ = QTable(n_states(), n_actions(), 0.0);
  std::fill(last_visit_.begin(), last_visit_.end(), 0);
  std::fill(last_error_.begin(), last_error_.end(), 0.0);
  sweeper_.clear();
  rng_.seed(seed);
}

void BonusAgent::set_kappa(double kappa) {
  if (!(kappa >= 0.0)) throw UsageError("kappa must be nonnegative");
  cfg_.kappa = kappa;
}

double BonusAgent::bonus(StateId x, ActionId a) const {
  const std::size_t pair = x * n_actions() + a;
  switch (cfg_.kind) {
    case BonusKind::none: return 0.0;
    case BonusKind::frequency: return -cfg_.alpha * static_cast<double>(counts_.visits(x, a));
    case BonusKind::recency: {
      const auto now = counts_.total_steps();
      const auto idle = now - std::min(now, last_visit_[pair]);
      return cfg_.alpha * std::sqrt(static_cast<double>(idle));
    }
    case BonusKind::error: return cfg_.alpha * last_error_[pair];
  }
  return 0.0;
}

ActionId BonusAgent::combined_greedy(StateId x) const {
  ActionId best = 0;
  double best_v = q_estimate(x, 0);
  for (ActionId a = 1; a < n_actions(); ++a) {
    const double v = q_estimate(x, a);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

ActionId BonusAgent::greedy_action(StateId x, bool include_exploration) const {
  return include_exploration ? combined_greedy(x) : q_r_.argmax(x);
}

std::vector<ActionId> BonusAgent::evaluation_actions(bool include_exploration) const {
  if (include_exploration) return Agent::evaluation_actions(true);
  return certainty_equivalence_policy(counts_, cfg_.gamma);
}

ActionId BonusAgent::choose(StateId x) {
  if (cfg_.epsilon > 0.0 && rng_.bernoulli(cfg_.epsilon)) return rng_.below(n_actions());
  return combined_greedy(x);
}

double BonusAgent::backup_state(StateId x) {
  const ActionId before = combined_greedy(x);
  const double old_r = q_r_(x, before);
  const double old_e = q_e_(x, before);
  const double g = cfg_.gamma;

  for (ActionId a = 0; a < n_actions(); ++a) {
    const auto n = counts_.visits(x, a);
    const double b = bonus(x, a);
    if (n == 0) {
      q_e_(x, a) = b;
      continue;
    }
    const double nd = static_cast<double>(n);
    double r = 0.0, e = 0.0;
    for (const auto& s : counts_.successors(x, a)) {
      const double p = static_cast<double>(s.count) / nd;
      const ActionId ay = combined_greedy(s.next);
      r += p * (s.reward_sum / static_cast<double>(s.count) + g * q_r_(s.next, ay));
      e += p * q_e_(s.next, ay);
    }
    if (cfg_.kind == BonusKind::error)
      last_error_[x * n_actions() + a] = std::abs(r - q_r_(x, a));
    q_r_(x, a) = r;
    q_e_(x, a) = b + g * e;
  }

  const ActionId after = combined_greedy(x);
  return std::max(std::abs(q_r_(x, after) - old_r),
                  cfg_.kappa * std::abs(q_e_(x, after) - old_e));
}

std::pair<std::size_t, double> BonusAgent::learn(StateId x, ActionId a, double reward,
                                                 StateId next) {
  counts_.record(x, a, next, reward);
  last_visit_[x * n_actions() + a] = counts_.total_steps();
  auto backup = [this](StateId s) { return backup_state(s); };

  if (cfg_.sweep == SweepKind::full) {
    const auto [sweeps, largest] =
        sweep_until_converged(n_states(), cfg_.priority_threshold, cfg_.max_full_sweeps, backup);
    return {sweeps * n_states(), largest};
  }
  auto weight = [this](StateId px, ActionId pa, StateId y) {
    return static_cast<double>(counts_.count(px, pa, y)) /
           static_cast<double>(counts_.visits(px, pa));
  };
  const SweepStats stats = sweeper_.run(x, counts_, backup, weight);
  return {stats.backups, stats.max_priority};
}

}  // namespace oim
