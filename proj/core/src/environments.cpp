#include "oim/environments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "oim/errors.hpp"
#include "params.hpp"

namespace oim {

EnvInstance::EnvInstance(const Environment& env, std::uint64_t seed)
    : mdp_(env.mdp), start_(env.start), state_(env.start), rng_(seed) {
  if (!mdp_) throw UsageError("environment has no model");
}

StateId EnvInstance::reset() {
  state_ = start_;
  return state_;
}

EnvInstance::Step EnvInstance::step(ActionId a) {
  if (a >= mdp_->n_actions()) throw UsageError("action out of range");
  const auto row = mdp_->outcomes(state_, a);
  double u = rng_.uniform();
  const Outcome* hit = &row.back();
  for (const auto& o : row) {
    if (u < o.prob) {
      hit = &o;
      break;
    }
    u -= o.prob;
  }
  state_ = hit->next;
  return {hit->next, hit->reward};
}

namespace {

Environment wrap(std::string name, TabularMdp mdp, StateId start, nlohmann::json params) {
  Environment env;
  env.name = std::move(name);
  env.mdp = std::make_shared<const TabularMdp>(std::move(mdp));
  env.start = start;
  env.params = std::move(params);
  return env;
}

constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

bool open_cell(const MazeMap& m, long r, long c) {
  return m.inside(r, c) && m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) != Cell::blocked;
}

}  // namespace

Environment riverswim(double gamma) {
  constexpr std::size_t n = 6;
  TabularMdp::Builder b(n, 2, gamma, 10000.0);
  for (StateId x = 0; x < n; ++x) {
    b.add(x, kDown, x == 0 ? 0 : x - 1, 1.0, x == 0 ? 5.0 : 0.0);
    if (x == 0) {
      b.add(x, kUp, 0, 0.7).add(x, kUp, 1, 0.3);
    } else if (x == n - 1) {
      b.add(x, kUp, x, 0.3, 10000.0).add(x, kUp, x - 1, 0.7);
    } else {
      b.add(x, kUp, x + 1, 0.3).add(x, kUp, x, 0.6).add(x, kUp, x - 1, 0.1);
    }
  }
  return wrap("riverswim", b.build(), 0, {{"gamma", gamma}});
}

Environment sixarms(const SixArmsTable& t, double gamma) {
  for (std::size_t k = 0; k < 6; ++k) {
    if (!(t.p[k] > 0.0 && t.p[k] <= 1.0)) throw UsageError("sixarms: p must lie in (0,1]");
    if (!(t.r[k] >= 0.0)) throw UsageError("sixarms: rewards must be nonnegative");
  }
  const double r0 = *std::max_element(t.r.begin(), t.r.end());
  TabularMdp::Builder b(7, 6, gamma, r0 > 0.0 ? r0 : 1.0);
  for (ActionId k = 0; k < 6; ++k) {
    b.add(0, k, k + 1, t.p[k]);
    if (t.p[k] < 1.0) b.add(0, k, 0, 1.0 - t.p[k]);
  }
  for (StateId room = 1; room <= 6; ++room)
    for (ActionId a = 0; a < 6; ++a) {
      if (a + 1 == room)
        b.add(room, a, room, 1.0, t.r[a]);
      else
        b.add(room, a, 0, 1.0);
    }
  nlohmann::json params{{"gamma", gamma}, {"p", t.p}, {"r", t.r}};
  return wrap("sixarms", b.build(), 0, std::move(params));
}

Environment chain(double slip, double gamma) {
  if (!(slip >= 0.0 && slip <= 1.0)) throw UsageError("chain: slip must lie in [0,1]");
  constexpr std::size_t n = 5;
  TabularMdp::Builder b(n, 2, gamma, 10.0);
  for (StateId x = 0; x < n; ++x) {
    // advance effect, reset effect
    const StateId fwd = x + 1 < n ? x + 1 : x;
    const double fwd_r = x + 1 < n ? 0.0 : 10.0;
    const double p_adv[2] = {1.0 - slip, slip};
    for (ActionId a = 0; a < 2; ++a) {
      if (p_adv[a] > 0.0) b.add(x, a, fwd, p_adv[a], fwd_r);
      if (p_adv[a] < 1.0) b.add(x, a, 0, 1.0 - p_adv[a], 2.0);
    }
  }
  return wrap("chain", b.build(), 0, {{"gamma", gamma}, {"slip", slip}});
}

Environment loop_env(double gamma) {
  // 0 is the junction; 1..4 is the left loop, 5..8 the right one.
  TabularMdp::Builder b(9, 2, gamma, 2.0);
  b.add(0, 0, 1, 1.0).add(0, 1, 5, 1.0);
  for (StateId x = 1; x <= 4; ++x)
    for (ActionId a = 0; a < 2; ++a) b.add(x, a, x < 4 ? x + 1 : 0, 1.0, x < 4 ? 0.0 : 1.0);
  for (StateId x = 5; x <= 8; ++x) {
    b.add(x, 1, x < 8 ? x + 1 : 0, 1.0, x < 8 ? 0.0 : 2.0);
    b.add(x, 0, 0, 1.0);
  }
  return wrap("loop", b.build(), 0, {{"gamma", gamma}});
}

Environment flag_maze(const MazeMap& map, double slip, double gamma) {
  if (!(slip >= 0.0 && slip <= 1.0)) throw UsageError("flagmaze: slip must lie in [0,1]");
  const auto flags = map.find(Cell::flag);
  if (flags.size() != 3) throw UsageError("flagmaze: map needs exactly three 'F' cells");

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  for (std::size_t r = 0; r < map.height(); ++r)
    for (std::size_t c = 0; c < map.width(); ++c)
      if (map.at(r, c) != Cell::blocked) index.emplace(std::pair{r, c}, index.size());

  const std::size_t n_masks = 8;
  const GridPos s = map.start();
  const StateId start = index.at({s.row, s.col}) * n_masks;
  TabularMdp::Builder b(index.size() * n_masks, 4, gamma, 3.0);

  for (const auto& [cell, i] : index) {
    const auto [r, c] = cell;
    for (unsigned mask = 0; mask < n_masks; ++mask) {
      const StateId x = i * n_masks + mask;
      for (ActionId a = 0; a < 4; ++a) {
        const std::pair<ActionId, double> moves[3] = {
            {a, 1.0 - slip}, {(a + 1) % 4, slip / 2}, {(a + 3) % 4, slip / 2}};
        for (const auto& [d, p] : moves) {
          if (p <= 0.0) continue;
          long nr = static_cast<long>(r) + kDr[d], nc = static_cast<long>(c) + kDc[d];
          if (!open_cell(map, nr, nc)) nr = static_cast<long>(r), nc = static_cast<long>(c);
          const auto tr = static_cast<std::size_t>(nr), tc = static_cast<std::size_t>(nc);
          unsigned next_mask = mask;
          if (map.at(tr, tc) == Cell::flag) {
            const auto f = std::find(flags.begin(), flags.end(), GridPos{tr, tc}) - flags.begin();
            next_mask |= 1u << f;
          }
          if (map.at(tr, tc) == Cell::goal)
            b.add(x, a, start, p, static_cast<double>(std::popcount(mask)));
          else
            b.add(x, a, index.at({tr, tc}) * n_masks + next_mask, p);
        }
      }
    }
  }
  nlohmann::json params{{"gamma", gamma}, {"slip", slip}, {"map", render_maze_map(map)}};
  return wrap("flagmaze", b.build(), start, std::move(params));
}

const MazeMap& flag_maze_default_map() {
  static const MazeMap map = parse_maze_map(
      "S.#F..#\n"
      "..#.#..\n"
      "..#.#.G\n"
      ".##.##.\n"
      "......#\n"
      "F#...#F\n");
  return map;
}

MazeMap generate_subgoal_maze(std::uint64_t seed, const SubgoalMazeOptions& o) {
  if (o.width < 4 || o.height < 4) throw UsageError("maze must be at least 4x4 including walls");
  if (!(o.blocked_fraction >= 0.0 && o.punishing_fraction >= 0.0 &&
        o.blocked_fraction + o.punishing_fraction < 1.0))
    throw UsageError("maze cell fractions must be nonnegative and sum below 1");

  const std::size_t w = o.width, h = o.height;
  const std::size_t interior = (w - 2) * (h - 2);
  const auto n_blocked = static_cast<std::size_t>(std::llround(o.blocked_fraction * interior));
  const auto n_punish = static_cast<std::size_t>(std::llround(o.punishing_fraction * interior));
  const GridPos start{1, 1}, goal{h - 2, w - 2};
  const GridPos subgoals[2] = {{1, w - 2}, {h - 2, 1}};

  std::vector<std::size_t> candidates;
  for (std::size_t r = 1; r + 1 < h; ++r)
    for (std::size_t c = 1; c + 1 < w; ++c) {
      const GridPos p{r, c};
      if (p == start || p == goal || p == subgoals[0] || p == subgoals[1]) continue;
      candidates.push_back(r * w + c);
    }
  if (n_blocked + n_punish > candidates.size()) throw UsageError("maze too small for its fractions");

  Rng rng(seed);
  for (std::size_t attempt = 0; attempt < o.max_retries; ++attempt) {
    std::vector<Cell> cells(w * h, Cell::free);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c)
        if (r == 0 || c == 0 || r + 1 == h || c + 1 == w) cells[r * w + c] = Cell::blocked;
    cells[start.row * w + start.col] = Cell::start;
    cells[goal.row * w + goal.col] = Cell::goal;
    for (const auto& g : subgoals) cells[g.row * w + g.col] = Cell::subgoal;

    for (std::size_t i = candidates.size(); i > 1; --i)
      std::swap(candidates[i - 1], candidates[rng.below(i)]);
    for (std::size_t i = 0; i < n_blocked; ++i) cells[candidates[i]] = Cell::blocked;
    for (std::size_t i = n_blocked; i < n_blocked + n_punish; ++i)
      cells[candidates[i]] = Cell::punishing;

    MazeMap map(w, h, std::move(cells));
    std::vector<bool> seen(w * h, false);
    std::queue<GridPos> frontier;
    frontier.push(start);
    seen[start.row * w + start.col] = true;
    while (!frontier.empty()) {
      const GridPos p = frontier.front();
      frontier.pop();
      if (map.at(p) == Cell::goal) return map;
      for (int d = 0; d < 4; ++d) {
        const long nr = static_cast<long>(p.row) + kDr[d], nc = static_cast<long>(p.col) + kDc[d];
        if (!open_cell(map, nr, nc)) continue;
        const auto k = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
        if (seen[k]) continue;
        seen[k] = true;
        // resets happen on entry, so no path continues through another goal
        const Cell cell = map.at(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
        if (cell == Cell::subgoal) continue;
        frontier.push({static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)});
      }
    }
  }
  throw UsageError("could not generate a maze with a reachable goal in " +
                   std::to_string(o.max_retries) + " attempts");
}

Environment maze_with_subgoals(const MazeMap& map, const SubgoalMazeOptions& o, double gamma) {
  if (!(o.noise >= 0.0 && o.noise <= 1.0)) throw UsageError("maze noise must lie in [0,1]");
  std::vector<std::size_t> index(map.width() * map.height(), SIZE_MAX);
  std::size_t n = 0;
  for (std::size_t r = 0; r < map.height(); ++r)
    for (std::size_t c = 0; c < map.width(); ++c)
      if (map.at(r, c) != Cell::blocked) index[r * map.width() + c] = n++;

  const GridPos s = map.start();
  const StateId start = index[s.row * map.width() + s.col];
  const double punish = o.punish_adds_step_cost ? -11.0 : -10.0;
  TabularMdp::Builder b(n, 4, gamma, 1000.0);
  b.reward_floor(punish);

  for (std::size_t r = 0; r < map.height(); ++r)
    for (std::size_t c = 0; c < map.width(); ++c) {
      if (map.at(r, c) == Cell::blocked) continue;
      const StateId x = index[r * map.width() + c];
      for (ActionId a = 0; a < 4; ++a)
        for (int d = 0; d < 4; ++d) {
          const double p = (static_cast<ActionId>(d) == a ? 1.0 - o.noise : 0.0) + o.noise / 4;
          if (p <= 0.0) continue;
          const long nr = static_cast<long>(r) + kDr[d], nc = static_cast<long>(c) + kDc[d];
          if (!open_cell(map, nr, nc)) {
            b.add(x, a, x, p, -2.0);
            continue;
          }
          const auto tr = static_cast<std::size_t>(nr), tc = static_cast<std::size_t>(nc);
          switch (map.at(tr, tc)) {
            case Cell::goal: b.add(x, a, start, p, 1000.0); break;
            case Cell::subgoal: b.add(x, a, start, p, 500.0); break;
            case Cell::punishing: b.add(x, a, index[tr * map.width() + tc], p, punish); break;
            default: b.add(x, a, index[tr * map.width() + tc], p, -1.0); break;
          }
        }
    }
  nlohmann::json params{{"gamma", gamma},
                        {"noise", o.noise},
                        {"punish_adds_step_cost", o.punish_adds_step_cost},
                        {"map", render_maze_map(map)}};
  return wrap("maze_with_subgoals", b.build(), start, std::move(params));
}

// ---------------------------------------------------------------- registry

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
Environment guarded(F&& build) {
  try {
    return build();
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("map: ") + e.what());
  }
}

}  // namespace

Environment make_environment(const std::string& name, const nlohmann::json& params) {
  detail::Params p(params, name);
  return guarded([&]() -> Environment {
    if (name == "riverswim") {
      const double g = p.get("gamma", 0.95);
      p.finish();
      return riverswim(g);
    }
    if (name == "sixarms") {
      SixArmsTable t;
      const double g = p.get("gamma", 0.95);
      t.p = p.get("p", t.p);
      t.r = p.get("r", t.r);
      p.finish();
      return sixarms(t, g);
    }
    if (name == "chain") {
      const double g = p.get("gamma", 0.95);
      const double slip = p.get("slip", 0.2);
      p.finish();
      return chain(slip, g);
    }
    if (name == "loop") {
      const double g = p.get("gamma", 0.95);
      p.finish();
      return loop_env(g);
    }
    if (name == "flagmaze") {
      const double g = p.get("gamma", 0.99);
      const double slip = p.get("slip", 0.1);
      const auto text = p.get<std::string>("map", "");
      const auto file = p.get<std::string>("map_file", "");
      p.finish();
      if (!text.empty() && !file.empty()) throw ConfigError("flagmaze: give map or map_file, not both");
      if (!file.empty()) return flag_maze(parse_maze_map(read_file(file)), slip, g);
      if (!text.empty()) return flag_maze(parse_maze_map(text), slip, g);
      return flag_maze(flag_maze_default_map(), slip, g);
    }
    if (name == "maze_with_subgoals") {
      SubgoalMazeOptions o;
      const double g = p.get("gamma", 0.98);
      o.width = p.get("width", o.width);
      o.height = p.get("height", o.height);
      o.blocked_fraction = p.get("blocked_fraction", o.blocked_fraction);
      o.punishing_fraction = p.get("punishing_fraction", o.punishing_fraction);
      o.noise = p.get("noise", o.noise);
      o.punish_adds_step_cost = p.get("punish_adds_step_cost", o.punish_adds_step_cost);
      o.max_retries = p.get("max_retries", o.max_retries);
      const auto maze_seed = p.get<std::uint64_t>("maze_seed", 1);
      const auto maze_index = p.get<std::uint64_t>("maze_index", 0);
      // consumed by the harness, which sets maze_index per run
      const auto n_mazes = p.get<std::uint64_t>("n_mazes", 1);
      const auto text = p.get<std::string>("map", "");
      p.finish();
      if (n_mazes < 1) throw ConfigError("maze_with_subgoals: n_mazes must be >= 1");
      const MazeMap map = text.empty() ? generate_subgoal_maze(derive_seed(maze_seed, maze_index), o)
                                       : parse_maze_map(text);
      Environment env = maze_with_subgoals(map, o, g);
      env.params["maze_seed"] = maze_seed;
      env.params["maze_index"] = maze_index;
      return env;
    }
    throw ConfigError("unknown environment '" + name + "'");
  });
}

std::vector<std::string> environment_names() {
  return {"riverswim", "sixarms", "chain", "loop", "flagmaze", "maze_with_subgoals"};
}

}  // namespace oim
