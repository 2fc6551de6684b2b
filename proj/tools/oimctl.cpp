// oimctl: run experiments, evaluate the bound calculator, inspect tasks.
//
// Exit codes: 0 ok, 2 configuration error, 3 expectation failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oim/environments.hpp"
#include "oim/errors.hpp"
#include "oim/harness.hpp"
#include "oim/pac_bounds.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kConfigError = 2;
constexpr int kThresholdFailure = 3;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw oim::ConfigError("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw oim::ConfigError(path + ": " + e.what());
  }
}

// key=value, where value is parsed as JSON and falls back to a string
void apply_kv(json& target, const std::vector<std::string>& kvs) {
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw oim::ConfigError("expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    json v = json::parse(value, nullptr, false);
    target[key] = v.is_discarded() ? json(value) : v;
  }
}

struct RunFlags {
  std::string config;
  std::string env, agent, protocol, out, format;
  std::vector<std::string> env_params, agent_params;
  std::optional<std::uint64_t> steps, seed;
  std::optional<std::size_t> runs, parallelism;
  std::optional<double> gamma, rmax;
  bool quiet = false;
};

oim::ExperimentConfig build_config(const RunFlags& f) {
  json j = f.config.empty() ? json::object() : read_json_file(f.config);
  oim::ExperimentConfig cfg = oim::ExperimentConfig::from_json(j);
  if (!f.env.empty()) cfg.env = f.env;
  if (!f.agent.empty()) cfg.agent.kind = f.agent;
  apply_kv(cfg.env_params, f.env_params);
  apply_kv(cfg.agent.params, f.agent_params);
  if (f.steps) cfg.total_steps = *f.steps;
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.runs) cfg.n_runs = *f.runs;
  if (f.parallelism) cfg.parallelism = *f.parallelism;
  if (f.gamma) cfg.env_params["gamma"] = *f.gamma;
  if (f.rmax) cfg.agent.params["r_max"] = *f.rmax;
  if (!f.protocol.empty()) {
    json p = cfg.to_json()["protocol"];
    p["kind"] = f.protocol;
    json patched = cfg.to_json();
    patched["protocol"] = p;
    cfg = oim::ExperimentConfig::from_json(patched);
  }
  if (!f.out.empty()) cfg.output_path = f.out;
  if (!f.format.empty()) cfg.format = f.format;
  // round-trip once more so flag values get the same validation as files
  return oim::ExperimentConfig::from_json(cfg.to_json());
}

int run_one(const oim::ExperimentConfig& cfg, bool print_header, bool quiet) {
  const auto result = oim::run_experiment(cfg);
  oim::emit(cfg, result);
  if (cfg.output_path.empty() || !quiet) {
    if (cfg.format == "json" && cfg.output_path.empty())
      std::cout << oim::summary_to_json(result.summary).dump(2) << '\n';
    else
      std::cout << oim::summary_to_csv(result.summary, print_header);
  }
  for (const auto& w : result.summary.warnings) std::cerr << "warning: " << w << '\n';
  const auto failures = oim::check_expectations(result.summary, cfg.expect);
  for (const auto& f : failures) std::cerr << "FAIL " << f << '\n';
  return failures.empty() ? 0 : kThresholdFailure;
}

int cmd_bench(const std::string& dir, std::optional<std::size_t> parallelism, const std::string& out_dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw oim::ConfigError("no .json configs in '" + dir + "'");
  int rc = 0;
  bool header = true;
  for (const auto& f : files) {
    auto cfg = oim::ExperimentConfig::from_json(read_json_file(f.string()));
    if (parallelism) cfg.parallelism = *parallelism;
    if (!out_dir.empty()) cfg.output_path = (fs::path(out_dir) / f.stem()).string() + "." + cfg.format;
    std::cerr << "== " << f.filename().string() << '\n';
    rc = std::max(rc, run_one(cfg, header, false));
    header = false;
  }
  return rc;
}

struct TheoryFlags {
  std::vector<double> epsilon{0.1}, delta{0.1}, gamma{0.9};
  double states = 10, actions = 2, r0max = 1.0;
  std::string variant = "thm1";
  bool csv = false;
};

int cmd_theory(const TheoryFlags& t) {
  const auto variant = oim::parse_bound_variant(t.variant);
  const bool sweep = t.csv || t.epsilon.size() > 1 || t.delta.size() > 1 || t.gamma.size() > 1;
  if (!sweep) {
    oim::BoundInputs in{t.epsilon[0], t.delta[0], t.states, t.actions, t.gamma[0], t.r0max};
    std::cout << oim::asymptotic_report(in, variant);
    return 0;
  }
  std::cout << "variant,epsilon,delta,states,actions,gamma,r0max,epsilon1,epsilon2,H,m,beta,r_max,"
               "step_bound,hypothesis_holds\n";
  for (double e : t.epsilon)
    for (double d : t.delta)
      for (double g : t.gamma) {
        oim::BoundInputs in{e, d, t.states, t.actions, g, t.r0max};
        const auto o = oim::compute_bounds(in, variant);
        std::printf("%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                    t.variant.c_str(), e, d, t.states, t.actions, g, t.r0max, o.epsilon1, o.epsilon2,
                    o.horizon, o.sample_size, o.beta, o.r_max, o.step_bound, o.hypothesis_holds ? 1 : 0);
        for (const auto& w : o.warnings) std::cerr << "warning: " << w << '\n';
      }
  return 0;
}

struct EnvFlags {
  std::string name;
  std::vector<std::string> params;
  std::string map_file;
  bool dump = false, render = false, list = false;
  std::size_t horizon = 0;
};

int cmd_env(const EnvFlags& f) {
  if (f.list) {
    for (const auto& n : oim::environment_names()) std::cout << n << '\n';
    return 0;
  }
  if (f.name.empty()) throw oim::ConfigError("env: give an environment name or --list");
  json params = json::object();
  apply_kv(params, f.params);
  if (!f.map_file.empty()) params["map_file"] = f.map_file;
  const auto env = oim::make_environment(f.name, params);
  const auto& m = *env.mdp;
  if (f.dump) {
    json j = m.to_json();
    j["start"] = env.start;
    std::cout << j.dump(1) << '\n';
    return 0;
  }
  std::cout << "name        " << env.name << '\n'
            << "states      " << m.n_states() << '\n'
            << "actions     " << m.n_actions() << '\n'
            << "gamma       " << m.gamma() << '\n'
            << "reward      [" << m.reward_floor() << ", " << m.r0_max() << "]\n"
            << "start       " << env.start << '\n';
  if (f.horizon > 0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", oim::optimal_finite_horizon_return(m, env.start, f.horizon));
    std::cout << "optimal " << f.horizon << "-step return " << buf << '\n';
  }
  if (f.render && env.params.contains("map")) std::cout << env.params["map"].get<std::string>();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimistic initial model toolkit"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", rf.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  run->add_option("--env", rf.env, "environment name");
  run->add_option("--env-param", rf.env_params, "environment parameter key=value");
  run->add_option("--agent", rf.agent, "agent kind");
  run->add_option("--agent-param", rf.agent_params, "agent parameter key=value");
  run->add_option("--steps", rf.steps, "learning steps per run");
  run->add_option("--runs", rf.runs, "number of runs");
  run->add_option("--seed", rf.seed, "master seed");
  run->add_option("--gamma", rf.gamma, "discount factor of the task");
  run->add_option("--rmax", rf.rmax, "optimism parameter R_max");
  run->add_option("--protocol", rf.protocol, "cumulative, phases or maze_eval");
  run->add_option("--out", rf.out, "output file");
  run->add_option("--format", rf.format, "csv or json");
  run->add_option("--parallelism", rf.parallelism, "worker threads");
  run->add_flag("--quiet", rf.quiet, "do not echo the summary when writing a file");

  std::string bench_dir, bench_out;
  std::optional<std::size_t> bench_par;
  auto* bench = app.add_subcommand("bench", "run every config in a directory");
  bench->add_option("dir", bench_dir, "directory of JSON configs")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--parallelism", bench_par, "worker threads");
  bench->add_option("--out-dir", bench_out, "write one output file per config here");

  TheoryFlags tf;
  auto* theory = app.add_subcommand("theory", "evaluate the convergence-theorem parameters");
  theory->add_option("--epsilon", tf.epsilon, "accuracy (several values sweep)")->delimiter(',');
  theory->add_option("--delta", tf.delta, "failure probability")->delimiter(',');
  theory->add_option("--states", tf.states, "|X|");
  theory->add_option("--actions", tf.actions, "|A|");
  theory->add_option("--gamma", tf.gamma, "discount factor")->delimiter(',');
  theory->add_option("--r0max", tf.r0max, "reward bound");
  theory->add_option("--variant", tf.variant, "thm1 or appxB");
  theory->add_flag("--csv", tf.csv, "CSV output");

  EnvFlags ef;
  auto* env = app.add_subcommand("env", "inspect, validate or dump an environment");
  env->add_option("name", ef.name, "environment name");
  env->add_option("--param", ef.params, "parameter key=value");
  env->add_option("--map", ef.map_file, "maze map file (flagmaze)");
  env->add_option("--optimal", ef.horizon, "print the optimal N-step return");
  env->add_flag("--dump", ef.dump, "print the exact model as JSON");
  env->add_flag("--render", ef.render, "print the grid map");
  env->add_flag("--list", ef.list, "list environment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return run_one(build_config(rf), true, rf.quiet);
    if (*bench) return cmd_bench(bench_dir, bench_par, bench_out);
    if (*theory) return cmd_theory(tf);
    if (*env) return cmd_env(ef);
  } catch (const oim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const oim::UsageError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const oim::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
