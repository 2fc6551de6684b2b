#pragma once

// Experiment orchestration: seeded Monte Carlo runs of an agent on an
// environment under one of three reporting protocols.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oim/agent.hpp"
#include "oim/environments.hpp"
#include "oim/stats.hpp"

namespace oim {

enum class ProtocolKind { cumulative, phases, maze_eval };

struct Protocol {
  ProtocolKind kind = ProtocolKind::cumulative;
  // phases
  std::size_t n_phases = 8;
  std::size_t phase_len = 1000;
  bool reset_per_phase = false;
  // maze_eval
  std::size_t test_every = 1000;
  std::size_t n_test_runs = 20;
  std::size_t test_len = 10000;
  std::vector<double> thresholds{0.95, 0.99, 0.998};
  bool include_exploration = false;
};

struct ExperimentConfig {
  std::string env = "riverswim";
  nlohmann::json env_params = nlohmann::json::object();
  AgentSpec agent{"oim", nlohmann::json::object()};
  std::uint64_t total_steps = 5000;  // learning steps; phases use n_phases*phase_len
  std::size_t n_runs = 1;
  std::uint64_t master_seed = 0;
  Protocol protocol;
  std::string output_path;  // empty: no file
  std::string format = "csv";
  std::size_t parallelism = 1;
  /// Optional {metric: {"min": x, "max": y}} checks.
  nlohmann::json expect = nlohmann::json::object();

  /// Throws ConfigError on unknown keys or bad values.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::uint64_t learning_steps() const;
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  /// cumulative: {total}; phases: per-phase sums; maze_eval: mean greedy
  /// return at each checkpoint.
  std::vector<double> values;
  std::vector<std::uint64_t> checkpoints;  // maze_eval: learning steps done
  double optimal = 0.0;                    // maze_eval: best test_len return

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct MetricRow {
  std::string metric;
  SampleStats stats;
};

struct Summary {
  std::string env;
  std::string agent;
  std::string param_hash;
  std::size_t n_runs = 0;
  std::vector<MetricRow> rows;
  std::vector<std::string> warnings;

  const MetricRow* find(const std::string& metric) const;
};

struct ThresholdResult {
  double fraction = 0;
  std::optional<double> mean_steps;  // over successful runs
  std::size_t successes = 0;
  std::vector<std::optional<std::uint64_t>> per_run;
};

/// For each fraction, the first checkpoint whose return reaches
/// fraction * optimal, per run. A nonpositive optimal_return means "use each
/// record's own optimum".
std::vector<ThresholdResult> steps_to_fraction(const std::vector<RunRecord>& records,
                                               double optimal_return,
                                               const std::vector<double>& fractions);

/// FNV-1a over the canonical JSON of everything that affects results.
std::string param_hash(const ExperimentConfig& cfg);

Summary summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& records);

struct ExperimentResult {
  Summary summary;
  std::vector<RunRecord> records;
};

/// Validates env, agent and output path before any run starts, then runs
/// n_runs seeded replications on up to `parallelism` threads.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// One replication; exposed for tests.
RunRecord run_single(const ExperimentConfig& cfg, const Environment& env, std::size_t run,
                     double optimal = 0.0);

/// Environment used by run `run` (maze tasks cycle through n_mazes maps).
Environment environment_for_run(const ExperimentConfig& cfg, std::size_t run);

std::string summary_to_csv(const Summary& s, bool header = true);
Summary summary_from_csv(const std::string& text);
nlohmann::json summary_to_json(const Summary& s);
Summary summary_from_json(const nlohmann::json& j);
nlohmann::json records_to_json(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_json(const nlohmann::json& j);

/// Human-readable failures of cfg.expect against s; empty when all pass.
std::vector<std::string> check_expectations(const Summary& s, const nlohmann::json& expect);

/// Writes the summary (and records, for json) to cfg.output_path.
void emit(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace oim
