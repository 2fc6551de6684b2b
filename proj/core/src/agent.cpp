#include "oim/agent.hpp"

#include "oim/baselines.hpp"
#include "oim/errors.hpp"
#include "oim/oim_agent.hpp"
#include "params.hpp"

namespace oim {

ActionId Agent::select_action(StateId x) {
  if (x >= n_states_) throw UsageError("state out of range in select_action");
  const ActionId a = choose(x);
  pending_ = StateAction{x, a};
  return a;
}

void Agent::observe(StateId x, ActionId a, double reward, StateId next) {
  if (!pending_ || pending_->x != x || pending_->a != a)
    throw UsageError("observe must follow select_action for the same state and action");
  if (next >= n_states_) throw UsageError("successor out of range in observe");
  pending_.reset();
  const auto [backups, max_priority] = learn(x, a, reward, next);
  if (trace_) trace_(StepTrace{steps_, x, a, reward, backups, max_priority});
  ++steps_;
}

ActionId Agent::greedy_action(StateId x, bool) const {
  ActionId best = 0;
  for (ActionId a = 1; a < n_actions_; ++a)
    if (q_estimate(x, a) > q_estimate(x, best)) best = a;
  return best;
}

void Agent::reset(std::uint64_t seed) {
  pending_.reset();
  steps_ = 0;
  restart(seed);
}

Policy Agent::greedy_policy(bool include_exploration) const {
  std::vector<ActionId> actions(n_states_);
  for (StateId x = 0; x < n_states_; ++x) actions[x] = greedy_action(x, include_exploration);
  return Policy::deterministic(actions, n_actions_);
}

std::vector<ActionId> Agent::evaluation_actions(bool include_exploration) const {
  std::vector<ActionId> actions(n_states_);
  for (StateId x = 0; x < n_states_; ++x) actions[x] = greedy_action(x, include_exploration);
  return actions;
}

// ---------------------------------------------------------------- factory

namespace {

SweepKind parse_sweep(const std::string& s) {
  if (s == "full") return SweepKind::full;
  if (s == "prioritized") return SweepKind::prioritized;
  throw ConfigError("unknown sweep kind '" + s + "'");
}

TieBreak parse_tie_break(const std::string& s) {
  if (s == "lowest_index") return TieBreak::lowest_index;
  if (s == "seeded_random") return TieBreak::seeded_random;
  throw ConfigError("unknown tie_break '" + s + "'");
}

BonusShape parse_shape(const std::string& s) {
  if (s == "inverse") return BonusShape::inverse;
  if (s == "inverse_sqrt") return BonusShape::inverse_sqrt;
  throw ConfigError("unknown bonus_shape '" + s + "'");
}

template <class F>
auto wrap_usage(F&& f) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::vector<std::string> agent_kinds() {
  return {"oim", "epsilon_greedy", "boltzmann", "oiv", "rmax", "mbie_eb", "bonus"};
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, const TaskInfo& task) {
  detail::Params p(spec.params, spec.kind);
  const std::uint64_t seed = p.get<std::uint64_t>("seed", 0);
  const double gamma = p.get<double>("gamma", task.gamma);
  const bool signed_rewards = task.reward_floor < 0.0;
  std::unique_ptr<Agent> agent;

  if (spec.kind == "oim") {
    OimConfig c;
    c.gamma = gamma;
    c.r_max = p.get<double>("r_max", task.r0_max);
    c.sweep = parse_sweep(p.get<std::string>("sweep", "prioritized"));
    c.priority_threshold = p.get<double>("priority_threshold", c.priority_threshold);
    c.max_backups_per_step = p.get<std::size_t>("max_backups_per_step", c.max_backups_per_step);
    c.max_full_sweeps = p.get<std::size_t>("max_full_sweeps", c.max_full_sweeps);
    c.tie_break = parse_tie_break(p.get<std::string>("tie_break", "lowest_index"));
    if (p.has("update_cap")) c.update_cap = p.get<std::uint64_t>("update_cap", 0);
    c.allow_negative_rewards = signed_rewards;
    p.finish();
    agent = wrap_usage(
        [&] { return std::make_unique<OimAgent>(task.n_states, task.n_actions, c, seed); });
  } else if (spec.kind == "epsilon_greedy" || spec.kind == "boltzmann" || spec.kind == "oiv") {
    const bool model_based = spec.kind == "epsilon_greedy" && p.get<bool>("model_based", false);
    if (model_based) {
      BonusConfig c;
      c.kind = BonusKind::none;
      c.kappa = 0.0;
      c.gamma = gamma;
      c.epsilon = p.get<double>("epsilon", 0.1);
      c.q0 = p.get<double>("q0", 0.0);
      c.priority_threshold = p.get<double>("priority_threshold", c.priority_threshold);
      c.max_backups_per_step = p.get<std::size_t>("max_backups_per_step", c.max_backups_per_step);
      p.finish();
      agent = wrap_usage(
          [&] { return std::make_unique<BonusAgent>(task.n_states, task.n_actions, c, seed); });
    } else {
      QLearningConfig c;
      c.gamma = gamma;
      c.alpha = p.get<double>("alpha", 0.1);
      if (spec.kind == "epsilon_greedy") {
        c.exploration = Exploration::epsilon_greedy;
        c.epsilon = p.get<double>("epsilon", 0.1);
        c.q0 = p.get<double>("q0", 0.0);
      } else if (spec.kind == "boltzmann") {
        c.exploration = Exploration::boltzmann;
        c.temperature = p.get<double>("temperature", 1.0);
        c.q0 = p.get<double>("q0", 0.0);
      } else {
        c.exploration = Exploration::greedy;
        c.q0 = p.get<double>("q0", task.r0_max / (1.0 - gamma));
      }
      p.finish();
      agent = wrap_usage([&] {
        return std::make_unique<QLearningAgent>(task.n_states, task.n_actions, c, seed);
      });
    }
  } else if (spec.kind == "rmax") {
    RmaxConfig c;
    c.gamma = gamma;
    c.m_known = p.get<std::uint64_t>("m_known", c.m_known);
    c.r_max = p.get<double>("r_max", task.r0_max);
    c.tolerance = p.get<double>("tolerance", c.tolerance);
    c.allow_negative_rewards = signed_rewards;
    p.finish();
    agent = wrap_usage([&] { return std::make_unique<RmaxAgent>(task.n_states, task.n_actions, c); });
  } else if (spec.kind == "mbie_eb") {
    MbieEbConfig c;
    c.gamma = gamma;
    c.beta = p.get<double>("beta", c.beta);
    c.shape = parse_shape(p.get<std::string>("bonus_shape", "inverse_sqrt"));
    c.q_init = p.get<double>("q_init", -1.0);
    c.r0_max = task.r0_max;
    c.tolerance = p.get<double>("tolerance", c.tolerance);
    c.max_sweeps = p.get<std::size_t>("max_sweeps", c.max_sweeps);
    p.finish();
    agent =
        wrap_usage([&] { return std::make_unique<MbieEbAgent>(task.n_states, task.n_actions, c); });
  } else if (spec.kind == "bonus") {
    BonusConfig c;
    c.gamma = gamma;
    c.kind = wrap_usage([&] { return parse_bonus_kind(p.get<std::string>("bonus", "frequency")); });
    c.kappa = p.get<double>("kappa", c.kappa);
    c.alpha = p.get<double>("alpha", c.alpha);
    c.epsilon = p.get<double>("epsilon", 0.0);
    c.q0 = p.get<double>("q0", 0.0);
    c.sweep = parse_sweep(p.get<std::string>("sweep", "prioritized"));
    c.priority_threshold = p.get<double>("priority_threshold", c.priority_threshold);
    c.max_backups_per_step = p.get<std::size_t>("max_backups_per_step", c.max_backups_per_step);
    p.finish();
    agent = wrap_usage(
        [&] { return std::make_unique<BonusAgent>(task.n_states, task.n_actions, c, seed); });
  } else {
    throw ConfigError("unknown agent kind '" + spec.kind + "'");
  }
  agent->reset(seed);
  return agent;
}

}  // namespace oim
