#include "seqcode/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>

#include "seqcode/trace_io.hpp"

namespace seqcode {

namespace {

ExperimentConfig paper_cluster() {
  ExperimentConfig cfg;
  cfg.workers = 4;
  cfg.rows_per_worker = 10;
  cfg.latency = ExponentialLatency{1.0};
  cfg.latency_seed = 1;
  cfg.problem.rows = 38;
  cfg.problem.cols = 500;
  cfg.problem.rank = 38;
  cfg.problem.gamma = 5.0;
  cfg.problem.source = MatrixSource::RandomUniform;
  cfg.problem.seed = 1;
  cfg.replications = 50;
  return cfg;
}

}  // namespace

ExperimentConfig example1_preset() {
  ExperimentConfig cfg = paper_cluster();
  cfg.label = "example1";
  cfg.phases = {PhasePlan{6, 1500, 3}, PhasePlan{38, 100000, 4}};
  cfg.configuration = Configuration{4, 10, {0, 0, 6, 32}};
  cfg.baseline_iterations = 100000;
  cfg.stop_below = 1e-3;
  cfg.thresholds = {1e-3};
  return cfg;
}

ExperimentConfig example2_preset() {
  ExperimentConfig cfg = paper_cluster();
  cfg.label = "example2";
  cfg.phases = {PhasePlan{5, 100, 1}, PhasePlan{15, 1500, 2}};
  cfg.configuration = Configuration{4, 10, {5, 10, 0, 0}};
  cfg.baseline_iterations = 5000;
  cfg.thresholds = {0.2};
  return cfg;
}

std::optional<ExperimentConfig> preset_by_name(const std::string& name) {
  if (name == "example1") return example1_preset();
  if (name == "example2") return example2_preset();
  return std::nullopt;
}

bool matches_preset(const ExperimentConfig& cfg, const ExperimentConfig& preset) {
  auto strip = [](ExperimentConfig c) {
    c.label.clear();
    c.replications = 0;
    c.latency_seed = 0;
    c.problem.seed = 0;
    return c;
  };
  const ExperimentConfig a = strip(cfg);
  const ExperimentConfig b = strip(preset);
  return a.workers == b.workers && a.rows_per_worker == b.rows_per_worker && a.latency == b.latency &&
         a.problem == b.problem && a.phases == b.phases && a.configuration == b.configuration &&
         a.baseline_iterations == b.baseline_iterations && a.stop_below == b.stop_below &&
         a.thresholds == b.thresholds && a.charge_second_round == b.charge_second_round;
}

void relabel_if_modified(ExperimentConfig& cfg) {
  const auto preset = preset_by_name(cfg.label);
  if (preset && !matches_preset(cfg, *preset)) cfg.label = "custom";
}

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.latency_seed = seed;
  cfg.problem.seed = seed;
}

void ExperimentConfig::validate() const {
  if (workers < 1 || rows_per_worker < 1) throw std::invalid_argument("cluster needs L >= 1 and n >= 1");
  seqcode::validate(latency);
  const auto& p = problem;
  if (p.rows < 1 || p.cols < 1) throw std::invalid_argument("problem dimensions must be positive");
  if (p.rank < 1 || p.rank > std::min(p.rows, p.cols)) throw std::invalid_argument("problem rank must be in [1, min(w, m)]");
  if (!(p.gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (p.source == MatrixSource::File && p.file.empty()) throw std::invalid_argument("file source needs a file path");
  if (phases.empty()) throw std::invalid_argument("schedule needs at least one phase");
  int prev = 0;
  for (const auto& ph : phases) {
    if (ph.rank <= prev) throw std::invalid_argument("phase ranks must be strictly increasing");
    if (ph.iterations < 0) throw std::invalid_argument("phase iteration count must be >= 0");
    if (ph.responders && (*ph.responders < 1 || *ph.responders > workers)) {
      throw std::invalid_argument("phase responder count must be in [1, L]");
    }
    prev = ph.rank;
  }
  if (prev > p.rank) throw std::invalid_argument("phase rank exceeds the problem rank");
  if (baseline_iterations < 0) throw std::invalid_argument("baseline_iterations must be >= 0");
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  for (double t : thresholds) {
    if (!(t > 0.0)) throw std::invalid_argument("thresholds must be positive");
  }
  if (stop_below && !(*stop_below > 0.0)) throw std::invalid_argument("stop_below must be positive");

  if (configuration) {
    const Configuration& c = *configuration;
    if (c.workers != workers || c.rows_per_worker != rows_per_worker) {
      throw std::invalid_argument("configuration shape does not match the cluster");
    }
    c.validate();
    const RowBudget budget = check_feasible(c);
    if (!budget.feasible) {
      throw std::invalid_argument("configuration " + c.to_string() + " needs " + std::to_string(budget.total) +
                                  " rows but the cluster holds " + std::to_string(budget.capacity));
    }
    if (c.total_rows() > p.rank) throw std::invalid_argument("configuration stacks more rows than the problem rank");
    for (const auto& ph : phases) {
      const auto ell = responders_for_rank(c, ph.rank);
      if (!ell) throw std::invalid_argument("configuration never recovers rank " + std::to_string(ph.rank));
      if (ph.responders && c.cumulative_rows(*ph.responders) < ph.rank) {
        throw std::invalid_argument("phase waits for too few workers to recover rank " + std::to_string(ph.rank));
      }
    }
  } else {
    for (const auto& ph : phases) {
      if (!ph.responders) throw std::invalid_argument("automatic configuration needs a responder count for every phase");
    }
  }
}

namespace {

std::uint64_t problem_seed(std::uint64_t seed, int replication, int attempt) {
  return mix64(seed ^ mix64((static_cast<std::uint64_t>(replication) << 20) + static_cast<std::uint64_t>(attempt)));
}

LassoProblem read_problem_file(const ProblemSpec& spec) {
  std::ifstream in(spec.file);
  if (!in) throw std::invalid_argument("cannot open problem file " + spec.file);
  LassoProblem out;
  out.F.resize(spec.rows, spec.cols);
  out.b.resize(spec.rows);
  out.gamma = spec.gamma;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    boost::trim(line);
    if (line.empty()) continue;
    if (row == spec.rows) throw std::invalid_argument("problem file has more than w rows");
    std::vector<std::string> fields;
    boost::split(fields, line, boost::is_any_of(","));
    if (static_cast<int>(fields.size()) != spec.cols + 1) {
      throw std::invalid_argument("problem file row " + std::to_string(row + 1) + " does not have m+1 values");
    }
    for (int c = 0; c <= spec.cols; ++c) {
      const double v = std::stod(fields[static_cast<std::size_t>(c)]);
      if (c < spec.cols) {
        out.F(row, c) = v;
      } else {
        out.b(row) = v;
      }
    }
    ++row;
  }
  if (row != spec.rows) throw std::invalid_argument("problem file has fewer than w rows");
  return out;
}

LassoProblem draw_problem(const ProblemSpec& spec, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  LassoProblem out;
  out.F.resize(spec.rows, spec.cols);
  out.b.resize(spec.rows);
  out.gamma = spec.gamma;
  for (int c = 0; c < spec.cols; ++c) {
    for (int r = 0; r < spec.rows; ++r) {
      out.F(r, c) = spec.source == MatrixSource::RandomUniform ? uniform(gen) : normal(gen);
    }
  }
  for (int r = 0; r < spec.rows; ++r) out.b(r) = normal(gen);
  return out;
}

constexpr int kMaxAttempts = 100;

}  // namespace

ProblemInstance make_problem(const ProblemSpec& spec, int replication) {
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    LassoProblem problem = spec.source == MatrixSource::File ? read_problem_file(spec)
                                                             : draw_problem(spec, problem_seed(spec.seed, replication, attempt));
    SvdFactors factors = compute_svd(problem.F);
    bool usable = factors.rank() == spec.rank;
    ReferenceSolution reference;
    if (usable) {
      reference = reference_solution(problem);
      usable = reference.x.norm() > 0.0;
    }
    if (usable) return ProblemInstance{std::move(problem), std::move(factors), std::move(reference), attempt};
    if (spec.source == MatrixSource::File) {
      throw std::invalid_argument("problem file has rank " + std::to_string(factors.rank()) + " (expected " +
                                  std::to_string(spec.rank) + ") or a zero minimizer");
    }
  }
  throw std::runtime_error("no usable problem instance after " + std::to_string(kMaxAttempts) + " draws");
}

Configuration resolve_configuration(const ExperimentConfig& cfg) {
  if (cfg.configuration) return *cfg.configuration;
  std::vector<RankTarget> targets;
  for (const auto& ph : cfg.phases) targets.push_back(RankTarget{ph.rank, *ph.responders});
  ConfigSearchOptions options;
  options.max_total_rows = cfg.problem.rank;
  auto found = select_configuration(cfg.workers, cfg.rows_per_worker, targets, options);
  if (!found) throw std::invalid_argument("no feasible configuration meets the phase schedule");
  return *found;
}

ReplicationResult run_replication(const ExperimentConfig& cfg, int replication) {
  ProblemInstance inst = make_problem(cfg.problem, replication);
  const int d = inst.factors.rank();

  ReplicationResult out;
  out.run_id = replication;
  out.sequential_config = resolve_configuration(cfg);
  out.baseline_config = out.sequential_config.total_rows() == d
                            ? out.sequential_config
                            : exact_configuration(cfg.workers, cfg.rows_per_worker, d);

  std::vector<PhaseSpec> specs;
  for (const auto& ph : cfg.phases) specs.push_back(PhaseSpec{ph.rank, ph.iterations});
  ApproxSchedule schedule = make_schedule(out.sequential_config, specs, d);
  for (std::size_t i = 0; i < cfg.phases.size(); ++i) {
    if (cfg.phases[i].responders) schedule.phases[i].responders = *cfg.phases[i].responders;
  }

  RunOptions options;
  options.reference = &inst.reference.x;
  options.stop_below = cfg.stop_below;
  options.charge_second_round = cfg.charge_second_round;

  const SeededRng master(cfg.latency_seed);
  const std::uint64_t rep = static_cast<std::uint64_t>(replication);
  const CodedLasso sequential(inst.problem, inst.factors, out.sequential_config);
  out.sequential = run_sequential(sequential, schedule, cfg.latency, master.derive(2 * rep + 1), options);
  if (out.baseline_config == out.sequential_config) {
    out.baseline = run_baseline(sequential, cfg.baseline_iterations, cfg.latency, master.derive(2 * rep), options);
  } else {
    const CodedLasso baseline(inst.problem, inst.factors, out.baseline_config);
    out.baseline = run_baseline(baseline, cfg.baseline_iterations, cfg.latency, master.derive(2 * rep), options);
  }
  return out;
}

RunSummary summarize_run(int run_id, const RunTrace& trace, const std::vector<double>& thresholds) {
  RunSummary s;
  s.run_id = run_id;
  s.algorithm = trace.algorithm;
  if (!trace.records.empty()) {
    const auto& last = trace.records.back();
    s.iterations = last.iteration;
    s.final_time = last.cum_time;
    s.final_suboptimality = last.suboptimality;
  }
  for (double t : thresholds) s.time_to.push_back(trace.time_to(t));
  return s;
}

ExperimentSummary aggregate(const std::vector<RunSummary>& runs, const std::vector<double>& thresholds) {
  std::map<int, const RunSummary*> baseline;
  std::map<int, const RunSummary*> sequential;
  for (const auto& r : runs) {
    if (r.time_to.size() != thresholds.size()) throw std::invalid_argument("run summary does not match the thresholds");
    if (r.algorithm == "baseline") {
      baseline[r.run_id] = &r;
    } else if (r.algorithm == "sequential") {
      sequential[r.run_id] = &r;
    } else {
      throw std::invalid_argument("unknown algorithm '" + r.algorithm + "'");
    }
  }

  ExperimentSummary out;
  for (const auto& [id, _] : baseline) {
    if (sequential.count(id)) ++out.replications;
  }
  double sum_b = 0.0;
  double sum_s = 0.0;
  for (const auto& [id, r] : baseline) sum_b += r->final_suboptimality;
  for (const auto& [id, r] : sequential) sum_s += r->final_suboptimality;
  if (!baseline.empty()) out.mean_final_suboptimality_baseline = sum_b / static_cast<double>(baseline.size());
  if (!sequential.empty()) out.mean_final_suboptimality_sequential = sum_s / static_cast<double>(sequential.size());

  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    ThresholdStats st;
    st.threshold = thresholds[j];
    double tb = 0.0;
    double ts = 0.0;
    for (const auto& [id, b] : baseline) {
      const auto it = sequential.find(id);
      if (it == sequential.end() || !b->time_to[j] || !it->second->time_to[j]) continue;
      ++st.paired;
      tb += *b->time_to[j];
      ts += *it->second->time_to[j];
    }
    if (st.paired > 0) {
      st.baseline_mean = tb / st.paired;
      st.sequential_mean = ts / st.paired;
      st.speedup = st.baseline_mean / st.sequential_mean;
      st.reduction = 1.0 - st.sequential_mean / st.baseline_mean;
    }
    out.thresholds.push_back(st);
  }
  return out;
}

void print_summary(std::ostream& out, const std::string& label, const ExperimentSummary& summary) {
  char buf[256];
  out << "experiment " << label << ": " << summary.replications << " paired replications\n";
  std::snprintf(buf, sizeof buf, "  mean final suboptimality: sequential %.6g, baseline %.6g\n",
                summary.mean_final_suboptimality_sequential, summary.mean_final_suboptimality_baseline);
  out << buf;
  for (const auto& t : summary.thresholds) {
    if (t.paired == 0) {
      std::snprintf(buf, sizeof buf, "  time to %.6g: not reached by both algorithms in any replication\n", t.threshold);
    } else {
      std::snprintf(buf, sizeof buf,
                    "  time to %.6g (%d pairs): baseline %.6g, sequential %.6g, speedup %.4fx, reduction %.2f%%\n",
                    t.threshold, t.paired, t.baseline_mean, t.sequential_mean, t.speedup, 100.0 * t.reduction);
    }
    out << buf;
  }
}

ExperimentOutputs run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& output_dir,
                                 bool all_traces, std::ostream* progress) {
  cfg.validate();
  namespace fs = std::filesystem;
  std::optional<fs::path> trace_path;
  fs::path trace_tmp;
  std::ofstream trace_out;
  if (output_dir) {
    fs::create_directories(*output_dir);
    trace_path = *output_dir / "trace.csv";
    trace_tmp = *trace_path;
    trace_tmp += ".partial";
    trace_out.open(trace_tmp, std::ios::binary | std::ios::trunc);
    if (!trace_out) throw std::runtime_error("cannot open " + trace_tmp.string() + " for writing");
    write_trace_header(trace_out);
  }

  auto discard = [&] {
    if (!output_dir) return;
    trace_out.close();
    std::error_code ec;
    fs::remove(trace_tmp, ec);
    fs::remove(*output_dir / "summary.csv.partial", ec);
  };

  ExperimentOutputs outputs;
  bool summary_written = false;
  try {
    for (int rep = 1; rep <= cfg.replications; ++rep) {
      ReplicationResult result = run_replication(cfg, rep);
      if (output_dir && (all_traces || rep == 1)) {
        write_trace_rows(trace_out, rep, result.baseline);
        write_trace_rows(trace_out, rep, result.sequential);
      }
      outputs.runs.push_back(summarize_run(rep, result.baseline, cfg.thresholds));
      outputs.runs.push_back(summarize_run(rep, result.sequential, cfg.thresholds));
      if (progress) {
        const auto& b = outputs.runs[outputs.runs.size() - 2];
        const auto& s = outputs.runs.back();
        *progress << "replication " << rep << "/" << cfg.replications << ": baseline " << b.iterations
                  << " iterations, sequential " << s.iterations << " iterations\n";
      }
    }
    outputs.summary = aggregate(outputs.runs, cfg.thresholds);

    if (output_dir) {
      trace_out.flush();
      if (!trace_out) throw std::runtime_error("failed writing " + trace_tmp.string());
      trace_out.close();
      std::ostringstream summary;
      summary << summary_header(cfg.thresholds) << '\n';
      write_summary_rows(summary, outputs.runs);
      write_file_atomically(*output_dir / "summary.csv", summary.str());
      summary_written = true;
      fs::rename(trace_tmp, *trace_path);
    }
  } catch (...) {
    discard();
    if (summary_written) {
      std::error_code ec;
      fs::remove(*output_dir / "summary.csv", ec);
    }
    throw;
  }
  return outputs;
}

}  // namespace seqcode
