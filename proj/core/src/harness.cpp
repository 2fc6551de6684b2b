#include "oim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "oim/errors.hpp"
#include "params.hpp"

namespace oim {

namespace {

std::string protocol_name(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::cumulative: return "cumulative";
    case ProtocolKind::phases: return "phases";
    case ProtocolKind::maze_eval: return "maze_eval";
  }
  return "?";
}

ProtocolKind parse_protocol(const std::string& s) {
  if (s == "cumulative") return ProtocolKind::cumulative;
  if (s == "phases") return ProtocolKind::phases;
  if (s == "maze_eval") return ProtocolKind::maze_eval;
  throw ConfigError("unknown protocol '" + s + "'");
}

nlohmann::json protocol_json(const Protocol& p) {
  nlohmann::json j{{"kind", protocol_name(p.kind)}};
  if (p.kind == ProtocolKind::phases) {
    j["n_phases"] = p.n_phases;
    j["phase_len"] = p.phase_len;
    j["reset_per_phase"] = p.reset_per_phase;
  } else if (p.kind == ProtocolKind::maze_eval) {
    j["test_every"] = p.test_every;
    j["n_test_runs"] = p.n_test_runs;
    j["test_len"] = p.test_len;
    j["thresholds"] = p.thresholds;
    j["include_exploration"] = p.include_exploration;
  }
  return j;
}

Protocol parse_protocol_json(const nlohmann::json& j) {
  Protocol p;
  if (j.is_string()) {
    p.kind = parse_protocol(j.get<std::string>());
    return p;
  }
  detail::Params r(j, "protocol");
  p.kind = parse_protocol(r.get<std::string>("kind", "cumulative"));
  p.n_phases = r.get("n_phases", p.n_phases);
  p.phase_len = r.get("phase_len", p.phase_len);
  p.reset_per_phase = r.get("reset_per_phase", p.reset_per_phase);
  p.test_every = r.get("test_every", p.test_every);
  p.n_test_runs = r.get("n_test_runs", p.n_test_runs);
  p.test_len = r.get("test_len", p.test_len);
  p.thresholds = r.get("thresholds", p.thresholds);
  p.include_exploration = r.get("include_exploration", p.include_exploration);
  r.finish();
  if (p.n_phases == 0 || p.phase_len == 0) throw ConfigError("protocol: phases must be nonempty");
  if (p.test_every == 0 || p.n_test_runs == 0 || p.test_len == 0)
    throw ConfigError("protocol: maze_eval sizes must be positive");
  for (double f : p.thresholds)
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("protocol: thresholds must lie in (0,1]");
  return p;
}

std::string fraction_label(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  detail::Params p(j, "experiment");
  ExperimentConfig c;
  p.get<std::string>("name", "");
  p.get<std::string>("description", "");
  c.env = p.get("env", c.env);
  c.env_params = p.get("env_params", c.env_params);
  if (p.has("agent")) {
    const auto a = p.get("agent", nlohmann::json());
    if (a.is_string()) {
      c.agent.kind = a.get<std::string>();
    } else {
      detail::Params ap(a, "agent");
      c.agent.kind = ap.get<std::string>("kind", "oim");
      c.agent.params = ap.get("params", nlohmann::json::object());
      ap.finish();
    }
  }
  if (p.has("agent_params")) c.agent.params = p.get("agent_params", nlohmann::json::object());
  c.total_steps = p.get("total_steps", c.total_steps);
  c.n_runs = p.get("n_runs", c.n_runs);
  c.master_seed = p.get("master_seed", c.master_seed);
  if (p.has("protocol")) c.protocol = parse_protocol_json(p.get("protocol", nlohmann::json()));
  c.output_path = p.get("out", c.output_path);
  c.format = p.get("format", c.format);
  c.parallelism = p.get("parallelism", c.parallelism);
  c.expect = p.get("expect", c.expect);
  p.finish();
  if (c.n_runs == 0) throw ConfigError("n_runs must be positive");
  if (c.parallelism == 0) throw ConfigError("parallelism must be positive");
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  if (!c.env_params.is_object()) throw ConfigError("env_params must be an object");
  if (!c.agent.params.is_object()) throw ConfigError("agent params must be an object");
  if (!c.expect.is_object()) throw ConfigError("expect must be an object");
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"env", env},
          {"env_params", env_params},
          {"agent", {{"kind", agent.kind}, {"params", agent.params}}},
          {"total_steps", total_steps},
          {"n_runs", n_runs},
          {"master_seed", master_seed},
          {"protocol", protocol_json(protocol)},
          {"out", output_path},
          {"format", format},
          {"parallelism", parallelism},
          {"expect", expect}};
}

std::uint64_t ExperimentConfig::learning_steps() const {
  if (protocol.kind == ProtocolKind::phases) return protocol.n_phases * protocol.phase_len;
  return total_steps;
}

std::string param_hash(const ExperimentConfig& cfg) {
  // output settings and parallelism do not change results
  const nlohmann::json j{{"env", cfg.env},
                         {"env_params", cfg.env_params},
                         {"agent", cfg.agent.kind},
                         {"agent_params", cfg.agent.params},
                         {"steps", cfg.learning_steps()},
                         {"n_runs", cfg.n_runs},
                         {"master_seed", cfg.master_seed},
                         {"protocol", protocol_json(cfg.protocol)}};
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(j.dump()));
  return buf;
}

// ---------------------------------------------------------------- runs

Environment environment_for_run(const ExperimentConfig& cfg, std::size_t run) {
  nlohmann::json params = cfg.env_params;
  if (params.contains("n_mazes")) {
    const auto n = params["n_mazes"].get<std::uint64_t>();
    if (n == 0) throw ConfigError("n_mazes must be >= 1");
    params["maze_index"] = run % n;
  }
  return make_environment(cfg.env, params);
}

namespace {

std::unique_ptr<Agent> build_agent(const ExperimentConfig& cfg, const Environment& env,
                                   std::uint64_t seed) {
  const TabularMdp& m = *env.mdp;
  TaskInfo task{m.n_states(), m.n_actions(), m.gamma(), m.r0_max(), m.reward_floor()};
  AgentSpec spec = cfg.agent;
  spec.params["seed"] = seed;
  return make_agent(spec, task);
}

double evaluate_greedy(const Environment& env, const std::vector<ActionId>& policy,
                       std::size_t steps, std::uint64_t seed) {
  EnvInstance sim(env, seed);
  StateId x = sim.reset();
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto s = sim.step(policy[x]);
    total += s.reward;
    x = s.next;
  }
  return total;
}

}  // namespace

RunRecord run_single(const ExperimentConfig& cfg, const Environment& env, std::size_t run,
                     double optimal) {
  RunRecord rec;
  rec.run = run;
  rec.seed = derive_seed(cfg.master_seed, run);
  const std::uint64_t agent_seed = derive_seed(rec.seed, 1);
  auto agent = build_agent(cfg, env, agent_seed);
  EnvInstance sim(env, derive_seed(rec.seed, 2));
  const Protocol& p = cfg.protocol;

  StateId x = sim.reset();
  auto step = [&]() {
    const ActionId a = agent->select_action(x);
    const auto s = sim.step(a);
    agent->observe(x, a, s.reward, s.next);
    x = s.next;
    return s.reward;
  };

  switch (p.kind) {
    case ProtocolKind::cumulative: {
      double total = 0.0;
      for (std::uint64_t t = 0; t < cfg.total_steps; ++t) total += step();
      rec.values.push_back(total);
      break;
    }
    case ProtocolKind::phases: {
      for (std::size_t ph = 0; ph < p.n_phases; ++ph) {
        if (p.reset_per_phase && ph > 0) {
          agent->reset(derive_seed(agent_seed, ph));
          x = sim.reset();
        }
        double total = 0.0;
        for (std::size_t t = 0; t < p.phase_len; ++t) total += step();
        rec.values.push_back(total);
      }
      break;
    }
    case ProtocolKind::maze_eval: {
      rec.optimal = optimal;
      const std::uint64_t eval_base = derive_seed(rec.seed, 3);
      for (std::uint64_t t = 1; t <= cfg.total_steps; ++t) {
        step();
        if (t % p.test_every != 0 && t != cfg.total_steps) continue;
        const auto policy = agent->evaluation_actions(p.include_exploration);
        double sum = 0.0;
        const std::size_t checkpoint = rec.checkpoints.size();
        for (std::size_t k = 0; k < p.n_test_runs; ++k)
          sum += evaluate_greedy(env, policy, p.test_len,
                                 derive_seed(eval_base, checkpoint * p.n_test_runs + k));
        rec.values.push_back(sum / static_cast<double>(p.n_test_runs));
        rec.checkpoints.push_back(t);
      }
      break;
    }
  }
  return rec;
}

std::vector<ThresholdResult> steps_to_fraction(const std::vector<RunRecord>& records,
                                               double optimal_return,
                                               const std::vector<double>& fractions) {
  std::vector<ThresholdResult> out;
  for (double f : fractions) {
    ThresholdResult tr;
    tr.fraction = f;
    double sum = 0.0;
    for (const auto& rec : records) {
      const double opt = optimal_return > 0.0 ? optimal_return : rec.optimal;
      std::optional<std::uint64_t> hit;
      for (std::size_t i = 0; i < rec.values.size(); ++i)
        if (rec.values[i] >= f * opt) {
          hit = i < rec.checkpoints.size() ? rec.checkpoints[i] : i;
          break;
        }
      if (hit) {
        ++tr.successes;
        sum += static_cast<double>(*hit);
      }
      tr.per_run.push_back(hit);
    }
    if (tr.successes > 0) tr.mean_steps = sum / static_cast<double>(tr.successes);
    out.push_back(std::move(tr));
  }
  return out;
}

const MetricRow* Summary::find(const std::string& metric) const {
  for (const auto& r : rows)
    if (r.metric == metric) return &r;
  return nullptr;
}

Summary summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  Summary s;
  s.env = cfg.env;
  s.agent = cfg.agent.kind;
  s.param_hash = param_hash(cfg);
  s.n_runs = records.size();
  auto add = [&](std::string name, const std::vector<double>& xs) {
    s.rows.push_back({std::move(name), describe(xs)});
  };
  auto column = [&](std::size_t i) {
    std::vector<double> xs;
    for (const auto& r : records)
      if (i < r.values.size()) xs.push_back(r.values[i]);
    return xs;
  };

  switch (cfg.protocol.kind) {
    case ProtocolKind::cumulative: add("total_reward", column(0)); break;
    case ProtocolKind::phases:
      for (std::size_t i = 0; i < cfg.protocol.n_phases; ++i)
        add("phase_" + std::to_string(i + 1), column(i));
      break;
    case ProtocolKind::maze_eval: {
      std::vector<double> last, opt;
      for (const auto& r : records) {
        if (!r.values.empty()) last.push_back(r.values.back());
        opt.push_back(r.optimal);
      }
      add("optimal_return", opt);
      add("final_eval_return", last);
      for (const auto& tr : steps_to_fraction(records, 0.0, cfg.protocol.thresholds)) {
        std::vector<double> steps, hit;
        for (const auto& h : tr.per_run) {
          if (h) steps.push_back(static_cast<double>(*h));
          hit.push_back(h ? 1.0 : 0.0);
        }
        add("steps_to_" + fraction_label(tr.fraction), steps);
        add("success_rate_" + fraction_label(tr.fraction), hit);
      }
      break;
    }
  }
  for (const auto& r : s.rows)
    if (!r.stats.ci95)
      s.warnings.push_back(r.metric + ": fewer than 2 samples, confidence interval omitted");
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  // Fail on configuration problems before doing any work.
  std::map<std::uint64_t, std::size_t> first_run_of_env;  // maze index -> slot
  std::vector<Environment> envs;
  std::vector<std::size_t> env_of_run(cfg.n_runs);
  const bool cycles = cfg.env_params.is_object() && cfg.env_params.contains("n_mazes");
  for (std::size_t i = 0; i < cfg.n_runs; ++i) {
    std::uint64_t key = 0;
    if (cycles) key = i % cfg.env_params["n_mazes"].get<std::uint64_t>();
    auto [it, fresh] = first_run_of_env.emplace(key, envs.size());
    if (fresh) envs.push_back(environment_for_run(cfg, i));
    env_of_run[i] = it->second;
  }
  build_agent(cfg, envs.front(), 0);
  if (!cfg.output_path.empty()) {
    std::ofstream probe(cfg.output_path, std::ios::app);
    if (!probe) throw ConfigError("cannot write output '" + cfg.output_path + "'");
  }

  std::vector<double> optimal(envs.size(), 0.0);
  if (cfg.protocol.kind == ProtocolKind::maze_eval)
    for (std::size_t e = 0; e < envs.size(); ++e)
      optimal[e] = optimal_finite_horizon_return(*envs[e].mdp, envs[e].start, cfg.protocol.test_len);

  ExperimentResult result;
  result.records.resize(cfg.n_runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.n_runs) return;
      try {
        const std::size_t e = env_of_run[i];
        result.records[i] = run_single(cfg, envs[e], i, optimal[e]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = cfg.n_runs;
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.parallelism, cfg.n_runs);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  result.summary = summarize(cfg, result.records);
  return result;
}

// ---------------------------------------------------------------- output

std::string summary_to_csv(const Summary& s, bool header) {
  std::string out;
  if (header) out += "env,agent,param_hash,n_runs,metric,n,mean,std,ci95\n";
  for (const auto& r : s.rows) {
    out += s.env + ',' + s.agent + ',' + s.param_hash + ',' + std::to_string(s.n_runs) + ',' +
           r.metric + ',' + std::to_string(r.stats.n) + ',' + fmt17(r.stats.mean) + ',' +
           fmt17(r.stats.std) + ',' + (r.stats.ci95 ? fmt17(*r.stats.ci95) : std::string()) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number '" + s + "'");
  }
}

}  // namespace

Summary summary_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Summary s;
  bool first = true;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (!seen_header) {
      if (f.size() != 9 || f[0] != "env") throw ConfigError("summary csv: missing header");
      seen_header = true;
      continue;
    }
    if (f.size() != 9) throw ConfigError("summary csv: expected 9 fields");
    if (first) {
      s.env = f[0];
      s.agent = f[1];
      s.param_hash = f[2];
      s.n_runs = static_cast<std::size_t>(std::stoull(f[3]));
      first = false;
    } else if (f[0] != s.env || f[1] != s.agent || f[2] != s.param_hash) {
      throw ConfigError("summary csv: rows from more than one experiment");
    }
    MetricRow r;
    r.metric = f[4];
    r.stats.n = static_cast<std::size_t>(std::stoull(f[5]));
    r.stats.mean = parse_double(f[6]);
    r.stats.std = parse_double(f[7]);
    if (!f[8].empty()) r.stats.ci95 = parse_double(f[8]);
    s.rows.push_back(std::move(r));
  }
  if (!seen_header) throw ConfigError("summary csv: empty input");
  return s;
}

nlohmann::json summary_to_json(const Summary& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows) {
    nlohmann::json row{{"metric", r.metric}, {"n", r.stats.n}, {"mean", r.stats.mean}, {"std", r.stats.std}};
    row["ci95"] = r.stats.ci95 ? nlohmann::json(*r.stats.ci95) : nlohmann::json();
    rows.push_back(std::move(row));
  }
  return {{"env", s.env},       {"agent", s.agent}, {"param_hash", s.param_hash},
          {"n_runs", s.n_runs}, {"metrics", rows},  {"warnings", s.warnings}};
}

Summary summary_from_json(const nlohmann::json& j) {
  try {
    Summary s;
    s.env = j.at("env").get<std::string>();
    s.agent = j.at("agent").get<std::string>();
    s.param_hash = j.at("param_hash").get<std::string>();
    s.n_runs = j.at("n_runs").get<std::size_t>();
    for (const auto& row : j.at("metrics")) {
      MetricRow r;
      r.metric = row.at("metric").get<std::string>();
      r.stats.n = row.at("n").get<std::size_t>();
      r.stats.mean = row.at("mean").get<double>();
      r.stats.std = row.at("std").get<double>();
      if (!row.at("ci95").is_null()) r.stats.ci95 = row.at("ci95").get<double>();
      s.rows.push_back(std::move(r));
    }
    if (j.contains("warnings")) s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("summary json: ") + e.what());
  }
}

nlohmann::json records_to_json(const std::vector<RunRecord>& records) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : records)
    out.push_back({{"run", r.run},
                   {"seed", r.seed},
                   {"values", r.values},
                   {"checkpoints", r.checkpoints},
                   {"optimal", r.optimal}});
  return out;
}

std::vector<RunRecord> records_from_json(const nlohmann::json& j) {
  std::vector<RunRecord> out;
  try {
    for (const auto& r : j) {
      RunRecord rec;
      rec.run = r.at("run").get<std::size_t>();
      rec.seed = r.at("seed").get<std::uint64_t>();
      rec.values = r.at("values").get<std::vector<double>>();
      rec.checkpoints = r.at("checkpoints").get<std::vector<std::uint64_t>>();
      rec.optimal = r.at("optimal").get<double>();
      out.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("records json: ") + e.what());
  }
  return out;
}

std::vector<std::string> check_expectations(const Summary& s, const nlohmann::json& expect) {
  std::vector<std::string> failures;
  for (const auto& [metric, bounds] : expect.items()) {
    const MetricRow* row = s.find(metric);
    if (!row) {
      failures.push_back(metric + ": no such metric");
      continue;
    }
    const double v = row->stats.mean;
    if (bounds.contains("min") && v < bounds["min"].get<double>())
      failures.push_back(metric + ": mean " + fmt17(v) + " below " + fmt17(bounds["min"].get<double>()));
    if (bounds.contains("max") && v > bounds["max"].get<double>())
      failures.push_back(metric + ": mean " + fmt17(v) + " above " + fmt17(bounds["max"].get<double>()));
  }
  return failures;
}

void emit(const ExperimentConfig& cfg, const ExperimentResult& result) {
  if (cfg.output_path.empty()) return;
  std::ofstream out(cfg.output_path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write output '" + cfg.output_path + "'");
  if (cfg.format == "json") {
    nlohmann::json j = summary_to_json(result.summary);
    j["records"] = records_to_json(result.records);
    out << j.dump(2) << '\n';
  } else {
    out << summary_to_csv(result.summary);
  }
}

}  // namespace oim
