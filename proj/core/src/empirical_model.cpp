#include "oim/empirical_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oim/errors.hpp"

namespace oim {

// ---------------------------------------------------------------- TransitionCounts

TransitionCounts::TransitionCounts(std::size_t n_states, std::size_t n_actions)
    : n_states_(n_states),
      n_actions_(n_actions),
      visits_(n_states * n_actions, 0),
      successors_(n_states * n_actions),
      predecessors_(n_states) {}

void TransitionCounts::record(StateId x, ActionId a, StateId y, double reward) {
  if (x >= n_states_ || y >= n_states_ || a >= n_actions_)
    throw UsageError("transition index out of range");
  const std::size_t pair = x * n_actions_ + a;
  ++visits_[pair];
  ++total_;
  auto& succ = successors_[pair];
  auto it = std::find_if(succ.begin(), succ.end(),
                         [y](const SuccessorCount& s) { return s.next == y; });
  if (it == succ.end()) {
    succ.push_back({y, 1, reward});
    predecessors_[y].push_back({x, a});
  } else {
    ++it->count;
    it->reward_sum += reward;
  }
}

std::uint64_t TransitionCounts::count(StateId x, ActionId a, StateId y) const {
  for (const auto& s : successors(x, a))
    if (s.next == y) return s.count;
  return 0;
}

double TransitionCounts::reward_sum(StateId x, ActionId a, StateId y) const {
  for (const auto& s : successors(x, a))
    if (s.next == y) return s.reward_sum;
  return 0.0;
}

// ---------------------------------------------------------------- ExtendedCountsModel

std::vector<ActionId> certainty_equivalence_policy(const TransitionCounts& counts, double gamma,
                                                   double tolerance, std::size_t max_sweeps) {
  const std::size_t n = counts.n_states(), m = counts.n_actions();
  std::vector<double> v(n, 0.0);
  std::vector<ActionId> policy(n, 0);
  auto q = [&](StateId x, ActionId a) {
    const double visits = static_cast<double>(counts.visits(x, a));
    double sum = 0.0;
    for (const auto& s : counts.successors(x, a))
      sum += static_cast<double>(s.count) / visits *
             (s.reward_sum / static_cast<double>(s.count) + gamma * v[s.next]);
    return sum;
  };
  // Gauss-Seidel in state order
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (StateId x = 0; x < n; ++x) {
      bool any = false;
      double best = 0.0;
      for (ActionId a = 0; a < m; ++a) {
        if (counts.visits(x, a) == 0) continue;
        const double qa = q(x, a);
        if (!any || qa > best) {
          best = qa;
          policy[x] = a;
          any = true;
        }
      }
      if (!any) continue;
      change = std::max(change, std::abs(best - v[x]));
      v[x] = best;
    }
    if (change <= tolerance) break;
  }
  return policy;
}

ExtendedCountsModel::ExtendedCountsModel(std::size_t n_states, std::size_t n_actions, double gamma,
                                         double r_max, ModelOptions opts)
    : counts_(n_states, n_actions), gamma_(gamma), r_max_(r_max), opts_(opts) {}

ExtendedCountsModel ExtendedCountsModel::init_optimistic(std::size_t n_states,
                                                         std::size_t n_actions, double gamma,
                                                         double r_max, ModelOptions opts) {
  if (n_states == 0 || n_actions == 0)
    throw UsageError("model needs at least one state and one action");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("discount must lie in [0,1)");
  if (!(r_max >= 0.0)) throw UsageError("r_max must be nonnegative");
  if (opts.update_cap && *opts.update_cap == 0) throw UsageError("update cap must be >= 1");
  return ExtendedCountsModel(n_states, n_actions, gamma, r_max, opts);
}

void ExtendedCountsModel::check_pair(StateId x, ActionId a, bool allow_eden) const {
  const StateId limit = allow_eden ? eden() : eden() - 1;
  if (x > limit || a >= n_actions())
    throw UsageError("state/action index out of range: (" + std::to_string(x) + "," +
                     std::to_string(a) + ")");
}

bool ExtendedCountsModel::record_transition(StateId x, ActionId a, StateId y, double reward) {
  check_pair(x, a, false);
  if (y >= n_states()) throw UsageError("successor must be a real state");
  if (reward < 0.0 && !opts_.allow_negative_rewards)
    throw UsageError("negative reward " + std::to_string(reward) +
                     " (rewards must be nonnegative)");
  if (opts_.update_cap && counts_.visits(x, a) >= *opts_.update_cap) return false;
  counts_.record(x, a, y, reward);
  return true;
}

std::uint64_t ExtendedCountsModel::n_sa(StateId x, ActionId a) const {
  check_pair(x, a, true);
  if (x == eden()) return 1;
  return counts_.visits(x, a) + 1;
}

std::uint64_t ExtendedCountsModel::n_say(StateId x, ActionId a, StateId y) const {
  check_pair(x, a, true);
  if (y > eden()) throw UsageError("successor index out of range");
  if (x == eden()) return y == eden() ? 1 : 0;
  if (y == eden()) return 1;
  return counts_.count(x, a, y);
}

double ExtendedCountsModel::c_say(StateId x, ActionId a, StateId y) const {
  check_pair(x, a, true);
  if (y > eden()) throw UsageError("successor index out of range");
  if (x == eden() || y == eden()) return 0.0;
  return counts_.reward_sum(x, a, y);
}

std::uint64_t ExtendedCountsModel::experience(StateId x, ActionId a) const {
  check_pair(x, a, false);
  return counts_.visits(x, a);
}

double ExtendedCountsModel::p_hat(StateId x, ActionId a, StateId y) const {
  return static_cast<double>(n_say(x, a, y)) / static_cast<double>(n_sa(x, a));
}

double ExtendedCountsModel::r_hat(StateId x, ActionId a, StateId y) const {
  const std::uint64_t n = n_say(x, a, y);
  return n == 0 ? 0.0 : c_say(x, a, y) / static_cast<double>(n);
}

std::vector<StateAction> ExtendedCountsModel::known_pairs(std::uint64_t m) const {
  if (m == 0) throw UsageError("known-pair threshold must be >= 1");
  std::vector<StateAction> out;
  for (StateId x = 0; x < n_states(); ++x)
    for (ActionId a = 0; a < n_actions(); ++a)
      if (counts_.visits(x, a) >= m) out.push_back({x, a});
  return out;
}

TabularMdp ExtendedCountsModel::to_extended_mdp() const {
  double top = r_max_, floor = 0.0;
  for (StateId x = 0; x < n_states(); ++x)
    for (ActionId a = 0; a < n_actions(); ++a)
      for (const auto& s : counts_.successors(x, a)) {
        const double r = s.reward_sum / static_cast<double>(s.count);
        top = std::max(top, r);
        floor = std::min(floor, r);
      }
  if (top <= 0.0) top = 1.0;

  TabularMdp::Builder b(n_states() + 1, n_actions(), gamma_, top);
  b.reward_floor(floor);
  for (StateId x = 0; x < n_states(); ++x)
    for (ActionId a = 0; a < n_actions(); ++a) {
      const double n = static_cast<double>(n_sa(x, a));
      for (const auto& s : counts_.successors(x, a))
        b.add(x, a, s.next, static_cast<double>(s.count) / n,
              s.reward_sum / static_cast<double>(s.count) +
                  exploration_reward(s.next, eden(), r_max_));
      b.add(x, a, eden(), 1.0 / n, exploration_reward(eden(), eden(), r_max_));
    }
  for (ActionId a = 0; a < n_actions(); ++a)
    b.add(eden(), a, eden(), 1.0, exploration_reward(eden(), eden(), r_max_));
  return b.build();
}

nlohmann::json ExtendedCountsModel::snapshot() const {
  nlohmann::json pairs = nlohmann::json::array();
  for (StateId x = 0; x < n_states(); ++x)
    for (ActionId a = 0; a < n_actions(); ++a) {
      if (counts_.visits(x, a) == 0) continue;
      nlohmann::json succ = nlohmann::json::array();
      for (const auto& s : counts_.successors(x, a))
        succ.push_back({{"y", s.next}, {"n", s.count}, {"c", s.reward_sum}});
      pairs.push_back({{"x", x}, {"a", a}, {"n", n_sa(x, a)}, {"successors", succ}});
    }
  nlohmann::json j = {{"n_states", n_states()},
                      {"n_actions", n_actions()},
                      {"gamma", gamma_},
                      {"r_max", r_max_},
                      {"allow_negative_rewards", opts_.allow_negative_rewards},
                      {"pairs", pairs}};
  j["update_cap"] = opts_.update_cap ? nlohmann::json(*opts_.update_cap) : nlohmann::json();
  return j;
}

ExtendedCountsModel ExtendedCountsModel::from_snapshot(const nlohmann::json& j) {
  ModelOptions opts;
  if (j.contains("update_cap") && !j.at("update_cap").is_null())
    opts.update_cap = j.at("update_cap").get<std::uint64_t>();
  opts.allow_negative_rewards = j.value("allow_negative_rewards", false);
  auto model = init_optimistic(j.at("n_states").get<std::size_t>(),
                               j.at("n_actions").get<std::size_t>(), j.at("gamma").get<double>(),
                               j.at("r_max").get<double>(), opts);
  // Replaying aggregated counts: one record per observation would lose
  // reward sums that are not multiples of the count, so set them directly.
  for (const auto& p : j.at("pairs")) {
    const auto x = p.at("x").get<StateId>();
    const auto a = p.at("a").get<ActionId>();
    std::uint64_t total = 0;
    for (const auto& s : p.at("successors")) {
      const auto y = s.at("y").get<StateId>();
      const auto n = s.at("n").get<std::uint64_t>();
      const double c = s.at("c").get<double>();
      if (n == 0) throw UsageError("snapshot successor with zero count");
      model.counts_.record(x, a, y, c);
      for (std::uint64_t k = 1; k < n; ++k) model.counts_.record(x, a, y, 0.0);
      total += n;
    }
    if (total + 1 != p.at("n").get<std::uint64_t>())
      throw UsageError("snapshot counts violate conservation at (" + std::to_string(x) + "," +
                       std::to_string(a) + ")");
  }
  return model;
}

}  // namespace oim
