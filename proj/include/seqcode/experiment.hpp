#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqcode/cluster.hpp"
#include "seqcode/feasibility.hpp"
#include "seqcode/solver.hpp"

namespace seqcode {

enum class MatrixSource { RandomUniform, RandomGaussian, File };

std::string to_string(MatrixSource source);
MatrixSource parse_matrix_source(const std::string& text);

struct ProblemSpec {
  int rows = 0;      // w
  int cols = 0;      // m
  int rank = 0;      // d, asserted after generation
  double gamma = 0.0;
  MatrixSource source = MatrixSource::RandomUniform;
  std::uint64_t seed = 1;
  std::string file;  // CSV, w rows of m+1 values: F row then b entry

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

// A phase of the sequential schedule. `responders` is only needed when the
// configuration is chosen automatically.
struct PhasePlan {
  int rank = 0;
  int iterations = 0;
  std::optional<int> responders;

  friend bool operator==(const PhasePlan&, const PhasePlan&) = default;
};

struct ExperimentConfig {
  std::string label = "custom";
  int workers = 0;
  int rows_per_worker = 0;
  LatencyModel latency = ExponentialLatency{1.0};
  std::uint64_t latency_seed = 1;
  ProblemSpec problem;
  std::vector<PhasePlan> phases;
  std::optional<Configuration> configuration;  // nullopt: pick automatically
  int baseline_iterations = 0;
  std::optional<double> stop_below;
  std::vector<double> thresholds;
  int replications = 1;
  bool charge_second_round = false;

  void validate() const;
};

ExperimentConfig example1_preset();
ExperimentConfig example2_preset();
std::optional<ExperimentConfig> preset_by_name(const std::string& name);

// True iff every experiment parameter equals the named preset's (replication
// count and seeds may differ).
bool matches_preset(const ExperimentConfig& cfg, const ExperimentConfig& preset);

// A preset label is replaced with "custom" once any parameter differs from
// that preset.
void relabel_if_modified(ExperimentConfig& cfg);

// Same master seed for problem and latency streams.
void apply_seed(ExperimentConfig& cfg, std::uint64_t seed);

// Flat key = value text with [cluster], [latency], [problem], [schedule],
// [run] sections.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// "6:1500, 38:100000" or with responders "6:1500@3, 38:100000@4".
std::vector<PhasePlan> parse_phase_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

// Everything a replication needs before iterating.
struct ProblemInstance {
  LassoProblem problem;
  SvdFactors factors;
  ReferenceSolution reference;
  int attempts = 1;
};

// Draws F and b for replication `replication`, redrawing when the rank is not
// the requested one or x* = 0.
ProblemInstance make_problem(const ProblemSpec& spec, int replication);

Configuration resolve_configuration(const ExperimentConfig& cfg);

struct RunSummary {
  int run_id = 0;  // replication, 1-based
  std::string algorithm;
  long iterations = 0;
  double final_time = 0.0;
  double final_suboptimality = 0.0;
  std::vector<std::optional<double>> time_to;  // parallel to thresholds
};

struct ReplicationResult {
  int run_id = 0;
  Configuration sequential_config;
  Configuration baseline_config;
  RunTrace baseline;
  RunTrace sequential;
};

ReplicationResult run_replication(const ExperimentConfig& cfg, int replication);

RunSummary summarize_run(int run_id, const RunTrace& trace, const std::vector<double>& thresholds);

struct ThresholdStats {
  double threshold = 0.0;
  int paired = 0;  // replications where both algorithms reached it
  double baseline_mean = 0.0;
  double sequential_mean = 0.0;
  double speedup = 0.0;    // baseline_mean / sequential_mean
  double reduction = 0.0;  // 1 - sequential_mean / baseline_mean
};

struct ExperimentSummary {
  int replications = 0;
  double mean_final_suboptimality_sequential = 0.0;
  double mean_final_suboptimality_baseline = 0.0;
  std::vector<ThresholdStats> thresholds;
};

ExperimentSummary aggregate(const std::vector<RunSummary>& runs, const std::vector<double>& thresholds);
void print_summary(std::ostream& out, const std::string& label, const ExperimentSummary& summary);

struct ExperimentOutputs {
  std::vector<RunSummary> runs;
  ExperimentSummary summary;
};

// Runs every replication; with an output directory writes trace.csv (first
// replication, or all when all_traces) and summary.csv atomically. Partial
// outputs are removed on failure.
ExperimentOutputs run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& output_dir,
                                 bool all_traces = false, std::ostream* progress = nullptr);

}  // namespace seqcode
