#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "oim/mdp.hpp"

namespace oim {

/// Per-step diagnostic record streamed from an agent to the harness.
struct StepTrace {
  std::uint64_t t = 0;
  StateId x = 0;
  ActionId a = 0;
  double reward = 0.0;
  std::size_t backups = 0;  // |L_t| for model-based agents
  double max_priority = 0.0;
};

using TraceHook = std::function<void(const StepTrace&)>;

/// Uniform behavioural contract shared by OIM and every baseline.
///
/// Each environment step is one select_action(x) followed by exactly one
/// observe(x, a, r, y) for the same (x, a); violations throw UsageError.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string_view kind() const = 0;

  ActionId select_action(StateId x);
  void observe(StateId x, ActionId a, double reward, StateId next);

  /// Value the agent currently assigns to (x,a), in its own units.
  virtual double q_estimate(StateId x, ActionId a) const = 0;

  /// Frozen greedy action for evaluation. Dual-value agents ignore their
  /// exploration component unless include_exploration is set.
  virtual ActionId greedy_action(StateId x, bool include_exploration = false) const;

  /// Forget everything learned and reseed internal randomness.
  void reset(std::uint64_t seed);

  Policy greedy_policy(bool include_exploration = false) const;

  /// Actions used when the learner is frozen and tested. Defaults to
  /// greedy_action per state; dual-value agents exploit their learned model
  /// instead, because their q_r follows the exploring policy.
  virtual std::vector<ActionId> evaluation_actions(bool include_exploration = false) const;

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  std::uint64_t steps() const noexcept { return steps_; }

  void set_trace_hook(TraceHook hook) { trace_ = std::move(hook); }

 protected:
  Agent(std::size_t n_states, std::size_t n_actions) : n_states_(n_states), n_actions_(n_actions) {}

  virtual ActionId choose(StateId x) = 0;
  /// Returns (backups, max priority) for the trace.
  virtual std::pair<std::size_t, double> learn(StateId x, ActionId a, double reward,
                                               StateId next) = 0;
  virtual void restart(std::uint64_t seed) = 0;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::uint64_t steps_ = 0;
  std::optional<StateAction> pending_;
  TraceHook trace_;
};

/// What an agent may know about its task before acting.
struct TaskInfo {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  double gamma = 0.95;
  double r0_max = 1.0;
  double reward_floor = 0.0;
};

/// Declarative agent description: a kind plus named parameters.
struct AgentSpec {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
};

/// Known kinds: oim, epsilon_greedy, boltzmann, oiv, rmax, mbie_eb, bonus.
/// Throws ConfigError for unknown kinds or parameters.
std::unique_ptr<Agent> make_agent(const AgentSpec& spec, const TaskInfo& task);

std::vector<std::string> agent_kinds();

}  // namespace oim
