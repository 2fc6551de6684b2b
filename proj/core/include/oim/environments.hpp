#pragma once

// The benchmark tasks as exact TabularMdp builders, plus a sampling
// front-end that owns the per-run random stream.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "oim/maze_map.hpp"
#include "oim/mdp.hpp"
#include "oim/rng.hpp"

namespace oim {

/// A named task: the exact model plus where runs begin.
struct Environment {
  std::string name;
  std::shared_ptr<const TabularMdp> mdp;
  StateId start = 0;
  nlohmann::json params = nlohmann::json::object();
};

/// Per-run simulator over an Environment's exact model.
class EnvInstance {
 public:
  EnvInstance(const Environment& env, std::uint64_t seed);

  StateId reset();
  StateId state() const noexcept { return state_; }

  struct Step {
    StateId next;
    double reward;
  };
  /// Samples y ~ P(x,a,.) and emits R(x,a,y). Throws UsageError for a bad
  /// action.
  Step step(ActionId a);

  const TabularMdp& mdp() const noexcept { return *mdp_; }

 private:
  std::shared_ptr<const TabularMdp> mdp_;
  StateId start_;
  StateId state_;
  Rng rng_;
  std::vector<double> weights_;
};

// Actions for the two-action chain-like tasks.
inline constexpr ActionId kDown = 0, kUp = 1;

Environment riverswim(double gamma = 0.95);

struct SixArmsTable {
  std::array<double, 6> p{1.0, 0.15, 0.10, 0.05, 0.03, 0.01};
  std::array<double, 6> r{50, 133, 300, 800, 1660, 6000};
};
Environment sixarms(const SixArmsTable& table = {}, double gamma = 0.95);

/// Action 0 advances, action 1 returns to the first state. With probability
/// `slip` the other action's effect happens instead.
Environment chain(double slip = 0.2, double gamma = 0.95);

Environment loop_env(double gamma = 0.95);

/// Grid moves N, E, S, W. The intended move happens with 1 - slip, each
/// perpendicular one with slip/2. Needs exactly three 'F' cells.
Environment flag_maze(const MazeMap& map, double slip = 0.1, double gamma = 0.99);
const MazeMap& flag_maze_default_map();

struct SubgoalMazeOptions {
  std::size_t width = 50;   // including the border wall
  std::size_t height = 50;
  double blocked_fraction = 0.2;
  double punishing_fraction = 0.2;
  double noise = 0.1;  // chance the action is replaced by a uniform one
  bool punish_adds_step_cost = false;
  std::size_t max_retries = 1000;
};

/// Random maze: start at (1,1), goal in the opposite interior corner,
/// subgoals in the other two. Retries until the goal is reachable; throws
/// UsageError after max_retries failures.
MazeMap generate_subgoal_maze(std::uint64_t seed, const SubgoalMazeOptions& opts = {});

Environment maze_with_subgoals(const MazeMap& map, const SubgoalMazeOptions& opts = {},
                               double gamma = 0.98);

/// Registry. Known names: riverswim, sixarms, chain, loop, flagmaze,
/// maze_with_subgoals. Unknown names or parameters throw ConfigError.
Environment make_environment(const std::string& name,
                             const nlohmann::json& params = nlohmann::json::object());
std::vector<std::string> environment_names();

}  // namespace oim
