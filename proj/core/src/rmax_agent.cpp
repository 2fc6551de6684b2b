#include <algorithm>
#include <cmath>

#include "oim/baselines.hpp"
#include "oim/errors.hpp"

namespace oim {

void RmaxConfig::validate() const {
  if (m_known < 1) throw UsageError("m_known must be >= 1");
  if (!(r_max >= 0.0)) throw UsageError("r_max must be nonnegative");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("discount must lie in [0,1)");
  if (!(tolerance > 0.0)) throw UsageError("tolerance must be positive");
}

namespace {

ExtendedCountsModel frozen_model(std::size_t n_states, std::size_t n_actions,
                                 const RmaxConfig& cfg) {
  cfg.validate();
  ModelOptions o;
  // A known pair's model never changes again.
  o.update_cap = cfg.m_known;
  o.allow_negative_rewards = cfg.allow_negative_rewards;
  return ExtendedCountsModel::init_optimistic(n_states, n_actions, cfg.gamma, cfg.r_max, o);
}

}  // namespace

RmaxAgent::RmaxAgent(std::size_t n_states, std::size_t n_actions, RmaxConfig cfg)
    : Agent(n_states, n_actions),
      cfg_(cfg),
      model_(frozen_model(n_states, n_actions, cfg)),
      q_(n_states, n_actions, model_.v_max()) {}

void RmaxAgent::restart(std::uint64_t) {
  model_ = frozen_model(n_states(), n_actions(), cfg_);
  q_ = QTable(n_states(), n_actions(), model_.v_max());
  solves_ = 0;
}

double RmaxAgent::p_known(StateId x, ActionId a, StateId y) const {
  const auto n = model_.experience(x, a);
  return n == 0 ? 0.0
                : static_cast<double>(model_.counts().count(x, a, y)) / static_cast<double>(n);
}

double RmaxAgent::solve() {
  ++solves_;
  const double g = cfg_.gamma;
  const double v_max = model_.v_max();
  const auto& counts = model_.counts();
  double largest = 0.0;
  for (std::size_t sweep = 0; sweep < 1'000'000; ++sweep) {
    largest = 0.0;
    for (StateId x = 0; x < n_states(); ++x)
      for (ActionId a = 0; a < n_actions(); ++a) {
        double v = v_max;
        if (known(x, a)) {
          const double n = static_cast<double>(counts.visits(x, a));
          v = 0.0;
          for (const auto& s : counts.successors(x, a))
            v += (static_cast<double>(s.count) / n) *
                 (s.reward_sum / static_cast<double>(s.count) + g * q_.max(s.next));
        }
        largest = std::max(largest, std::abs(v - q_(x, a)));
        q_(x, a) = v;
      }
    if (largest <= cfg_.tolerance) break;
  }
  return largest;
}

std::pair<std::size_t, double> RmaxAgent::learn(StateId x, ActionId a, double reward,
                                                StateId next) {
  const bool was_known = known(x, a);
  model_.record_transition(x, a, next, reward);
  if (!was_known && known(x, a)) return {n_states(), solve()};
  return {0, 0.0};
}

}  // namespace oim
