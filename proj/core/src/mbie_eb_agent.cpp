#include <algorithm>
#include <cmath>

#include "oim/baselines.hpp"
#include "oim/errors.hpp"

namespace oim {

void MbieEbConfig::validate() const {
  if (!(beta >= 0.0)) throw UsageError("beta must be nonnegative");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("discount must lie in [0,1)");
  if (!(tolerance > 0.0)) throw UsageError("tolerance must be positive");
}

MbieEbAgent::MbieEbAgent(std::size_t n_states, std::size_t n_actions, MbieEbConfig cfg)
    : Agent(n_states, n_actions),
      cfg_((cfg.validate(), cfg)),
      q_init_(cfg.q_init >= 0.0 ? cfg.q_init : (cfg.r0_max + cfg.beta) / (1.0 - cfg.gamma)),
      counts_(n_states, n_actions),
      q_(n_states, n_actions, q_init_) {}

void MbieEbAgent::restart(std::uint64_t) {
  counts_ = TransitionCounts(n_states(), n_actions());
  q_ = QTable(n_states(), n_actions(), q_init_);
}

double MbieEbAgent::bonus(StateId x, ActionId a) const {
  const auto n = counts_.visits(x, a);
  if (n == 0) return cfg_.beta;
  const double nd = static_cast<double>(n);
  return cfg_.shape == BonusShape::inverse ? cfg_.beta / nd : cfg_.beta / std::sqrt(nd);
}

double MbieEbAgent::backup_state(StateId x) {
  const double before = q_.max(x);
  for (ActionId a = 0; a < n_actions(); ++a) {
    const auto n = counts_.visits(x, a);
    if (n == 0) continue;
    const double nd = static_cast<double>(n);
    double v = bonus(x, a);
    for (const auto& s : counts_.successors(x, a))
      v += (static_cast<double>(s.count) / nd) *
           (s.reward_sum / static_cast<double>(s.count) + cfg_.gamma * q_.max(s.next));
    q_(x, a) = v;
  }
  return std::abs(q_.max(x) - before);
}

std::pair<std::size_t, double> MbieEbAgent::learn(StateId x, ActionId a, double reward,
                                                  StateId next) {
  counts_.record(x, a, next, reward);
  const auto [sweeps, largest] = sweep_until_converged(
      n_states(), cfg_.tolerance, cfg_.max_sweeps, [this](StateId s) { return backup_state(s); });
  return {sweeps * n_states(), largest};
}

}  // namespace oim
