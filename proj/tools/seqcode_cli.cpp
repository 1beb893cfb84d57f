#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "seqcode/codec.hpp"
#include "seqcode/experiment.hpp"
#include "seqcode/feasibility.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

int cmd_feasible(int L, int n, const std::vector<int>& k) {
  const seqcode::Configuration cfg{L, n, k};
  cfg.validate();
  const auto budget = seqcode::check_feasible(cfg);
  std::cout << "configuration L=" << L << " n=" << n << " k=(" << join(k) << ")\n";
  for (std::size_t i = 0; i < budget.per_level.size(); ++i) {
    std::cout << "  s_" << (i + 1) << " = " << budget.per_level[i] << "\n";
  }
  std::cout << "total " << budget.total << "/" << budget.capacity << "\n";
  std::cout << (budget.feasible ? "feasible" : "infeasible") << "\n";
  return budget.feasible ? 0 : kExitValidation;
}

struct SelfTest {
  long subsets = 0;
  long failures = 0;
  double worst = 0.0;
};

// Decodes from every nonempty worker subset and compares with A_i z.
SelfTest subset_self_test(const seqcode::SourceMatrices& src, const seqcode::EncodedSystem& sys, std::uint64_t seed) {
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(sys.cols);
  for (int c = 0; c < sys.cols; ++c) z(c) = normal(gen);

  std::vector<seqcode::WorkerResult> all;
  for (const auto& w : sys.workers) all.push_back(seqcode::worker_multiply(w, z));

  SelfTest out;
  const int L = sys.config.workers;
  for (unsigned mask = 1; mask < (1u << L); ++mask) {
    std::vector<seqcode::WorkerResult> subset;
    for (int w = 0; w < L; ++w) {
      if (mask & (1u << w)) subset.push_back(all[static_cast<std::size_t>(w)]);
    }
    ++out.subsets;
    bool ok = true;
    try {
      const auto decoded = seqcode::decode_prefix(subset, sys);
      for (std::size_t i = 0; i < decoded.size(); ++i) {
        const double err = seqcode::relative_error(decoded[i], src.levels[i] * z);
        out.worst = std::max(out.worst, err);
        if (!(err <= 1e-8)) ok = false;
      }
    } catch (const seqcode::InsufficientResults&) {
      ok = false;
    }
    if (!ok) ++out.failures;
  }
  return out;
}

int cmd_demo_encode(int L, int n, const std::vector<int>& k, int m, std::uint64_t seed, const std::string& output) {
  const seqcode::Configuration cfg{L, n, k};
  cfg.validate();
  if (m < 1) throw std::invalid_argument("--m must be >= 1");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  seqcode::SourceMatrices src;
  src.cols = m;
  for (int rows : k) {
    Eigen::MatrixXd a(rows, m);
    for (int c = 0; c < m; ++c) {
      for (int r = 0; r < rows; ++r) a(r, c) = normal(gen);
    }
    src.levels.push_back(std::move(a));
  }
  const auto sys = seqcode::encode_all(src, cfg);

  std::ostringstream csv;
  seqcode::write_provenance_csv(csv, sys);
  std::ostream* verdict = &std::cout;
  if (output.empty()) {
    std::cout << csv.str();
    verdict = &std::cerr;
  } else {
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + output + " for writing");
    out << csv.str();
  }

  const SelfTest t = subset_self_test(src, sys, seed);
  char buf[160];
  std::snprintf(buf, sizeof buf, "self-test %s: %ld/%ld worker subsets decoded, worst relative error %.3g\n",
                t.failures == 0 ? "pass" : "FAIL", t.subsets - t.failures, t.subsets, t.worst);
  *verdict << buf;
  return t.failures == 0 ? 0 : kExitRuntime;
}

int cmd_oracle_check(int max_L, int max_k) {
  if (max_L < 1 || max_k < 0) throw std::invalid_argument("--max-L must be >= 1 and --max-k >= 0");
  seqcode::OracleLimits limits;
  limits.max_workers = std::max(limits.max_workers, max_L);
  limits.max_rows = std::max(limits.max_rows, max_k);
  long checked = 0;
  long mismatches = 0;
  for (int L = 1; L <= max_L; ++L) {
    for (int i = 1; i <= L; ++i) {
      for (int k = 0; k <= max_k; ++k) {
        const auto formula = seqcode::row_count_s(i, k, L);
        const auto oracle = seqcode::min_rows_oracle(L, i, k, limits).objective;
        ++checked;
        if (formula != oracle) {
          ++mismatches;
          std::cout << "mismatch L=" << L << " i=" << i << " k=" << k << ": formula " << formula << ", oracle " << oracle
                    << "\n";
        }
      }
    }
  }
  std::cout << checked << " cases checked, " << mismatches << " mismatches\n";
  return mismatches == 0 ? 0 : kExitRuntime;
}

struct ExperimentArgs {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::string output;
  bool all_traces = false;
  std::string phases;
  bool quiet = false;
};

int cmd_experiment(const ExperimentArgs& a) {
  seqcode::ExperimentConfig cfg;
  if (!a.preset.empty()) {
    auto p = seqcode::preset_by_name(a.preset);
    if (!p) throw std::invalid_argument("unknown preset '" + a.preset + "'");
    cfg = *p;
  } else {
    cfg = seqcode::load_experiment_config(a.config);
  }
  if (a.seed) seqcode::apply_seed(cfg, *a.seed);
  if (a.replications) cfg.replications = *a.replications;
  if (!a.phases.empty()) cfg.phases = seqcode::parse_phase_list(a.phases);
  seqcode::relabel_if_modified(cfg);
  cfg.validate();

  std::optional<std::filesystem::path> out;
  if (!a.output.empty()) out = a.output;
  const auto result = seqcode::run_experiment(cfg, out, a.all_traces, a.quiet ? nullptr : &std::cerr);
  seqcode::print_summary(std::cout, cfg.label, result.summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential coded matrix-vector multiplication toolkit"};
  app.require_subcommand(1);

  int L = 0;
  int n = 0;
  std::vector<int> k;

  auto* feasible = app.add_subcommand("feasible", "Check a configuration against the row budget");
  feasible->add_option("--L", L, "Number of workers")->required();
  feasible->add_option("--n", n, "Rows per worker")->required();
  feasible->add_option("--k", k, "Per-level rows k_1,...,k_L")->required()->delimiter(',');

  int m = 0;
  std::uint64_t seed = 1;
  std::string output;
  auto* demo = app.add_subcommand("demo-encode", "Encode random levels and dump row provenance");
  demo->add_option("--L", L, "Number of workers")->required();
  demo->add_option("--n", n, "Rows per worker")->required();
  demo->add_option("--k", k, "Per-level rows k_1,...,k_L")->required()->delimiter(',');
  demo->add_option("--m", m, "Columns of the source matrices")->required();
  demo->add_option("--seed", seed, "Seed for the random source matrices");
  demo->add_option("--output", output, "CSV destination (default: stdout)");

  int max_L = 5;
  int max_k = 12;
  auto* oracle = app.add_subcommand("oracle-check", "Compare the row budget formula with exhaustive search");
  oracle->add_option("--max-L", max_L, "Largest worker count");
  oracle->add_option("--max-k", max_k, "Largest level row count");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Run sequential and baseline solvers over replications");
  auto* preset_opt = exp->add_option("--preset", ea.preset, "example1 or example2");
  auto* config_opt = exp->add_option("--config", ea.config, "Experiment config file");
  preset_opt->excludes(config_opt);
  exp->add_option("--seed", ea.seed, "Master seed for problems and latencies");
  exp->add_option("--replications", ea.replications, "Number of paired replications");
  exp->add_option("--output", ea.output, "Directory for trace.csv and summary.csv");
  exp->add_flag("--all-traces", ea.all_traces, "Write every replication's trace, not only the first");
  exp->add_option("--phases", ea.phases, "Override the schedule, e.g. \"6:1500@3, 38:100000@4\"");
  exp->add_flag("--quiet", ea.quiet, "No per-replication progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*feasible) return cmd_feasible(L, n, k);
    if (*demo) return cmd_demo_encode(L, n, k, m, seed, output);
    if (*oracle) return cmd_oracle_check(max_L, max_k);
    if (*exp) {
      if (ea.preset.empty() == ea.config.empty()) {
        std::cerr << "experiment needs exactly one of --preset or --config\n";
        return kExitUsage;
      }
      return cmd_experiment(ea);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const seqcode::InfeasibleConfiguration& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const seqcode::PackingFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
