#include <algorithm>
#include <cmath>

#include "oim/baselines.hpp"
#include "oim/errors.hpp"

namespace oim {

void QLearningConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in (0,1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("discount must lie in [0,1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw UsageError("epsilon must lie in [0,1]");
  if (exploration == Exploration::boltzmann && !(temperature > 0.0))
    throw UsageError("temperature must be positive");
}

std::vector<double> boltzmann_probabilities(std::span<const double> q, double temperature) {
  if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
  const double top = *std::max_element(q.begin(), q.end());
  std::vector<double> p(q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = std::exp((q[i] - top) / temperature);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

QLearningAgent::QLearningAgent(std::size_t n_states, std::size_t n_actions, QLearningConfig cfg,
                               std::uint64_t seed)
    : Agent(n_states, n_actions), cfg_(cfg), q_(n_states, n_actions, cfg.q0), rng_(seed) {
  cfg_.validate();
}

std::string_view QLearningAgent::kind() const {
  switch (cfg_.exploration) {
    case Exploration::epsilon_greedy: return "epsilon_greedy";
    case Exploration::boltzmann: return "boltzmann";
    case Exploration::greedy: return "oiv";
  }
  return "q_learning";
}

ActionId QLearningAgent::choose(StateId x) {
  switch (cfg_.exploration) {
    case Exploration::epsilon_greedy:
      if (cfg_.epsilon > 0.0 && rng_.bernoulli(cfg_.epsilon)) return rng_.below(n_actions());
      return q_.argmax(x);
    case Exploration::boltzmann: {
      const auto p = boltzmann_probabilities(q_.row(x), cfg_.temperature);
      return rng_.categorical(p);
    }
    case Exploration::greedy: return q_.argmax(x);
  }
  return q_.argmax(x);
}

std::pair<std::size_t, double> QLearningAgent::learn(StateId x, ActionId a, double reward,
                                                     StateId next) {
  const double target = reward + cfg_.gamma * q_.max(next);
  q_(x, a) += cfg_.alpha * (target - q_(x, a));
  return {1, 0.0};
}

void QLearningAgent::restart(std::uint64_t seed) {
  q_ = QTable(n_states(), n_actions(), cfg_.q0);
  rng_.seed(seed);
}

}  // namespace oim
