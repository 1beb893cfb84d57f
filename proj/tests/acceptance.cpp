// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "seqcode/cluster.hpp"
#include "seqcode/codec.hpp"
#include "seqcode/experiment.hpp"
#include "seqcode/feasibility.hpp"
#include "seqcode/solver.hpp"

using namespace seqcode;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Every configuration with L <= 5, k_i <= 8 on the smallest n that fits,
// every worker subset, decoded against a dense product.
Verdict coding_round_trip() {
  std::mt19937_64 gen(1);
  const int m = 10;
  long configs = 0;
  long subsets = 0;
  double worst = 0.0;
  for (int L = 1; L <= 5; ++L) {
    std::vector<int> k(static_cast<std::size_t>(L), 0);
    while (true) {
      std::int64_t total = 0;
      for (int i = 1; i <= L; ++i) total += row_count_s(i, k[static_cast<std::size_t>(i - 1)], L);
      const int n = static_cast<int>(std::max<std::int64_t>(1, (total + L - 1) / L));
      const Configuration cfg{L, n, k};
      SourceMatrices src;
      src.cols = m;
      for (int rows : k) src.levels.push_back(oracle::random_matrix(rows, m, gen));
      EncodedSystem sys;
      try {
        sys = encode_all(src, cfg);
      } catch (const std::exception& e) {
        return {false, "encode failed for " + cfg.to_string() + ": " + e.what()};
      }
      const Eigen::VectorXd z = oracle::random_vector(m, gen);
      std::vector<Eigen::VectorXd> truth;
      for (const auto& a : src.levels) truth.push_back(oracle::dense_matvec(a, z));
      std::vector<WorkerResult> all;
      for (const auto& w : sys.workers) all.push_back(worker_multiply(w, z));
      for (unsigned mask = 1; mask < (1u << L); ++mask) {
        std::vector<WorkerResult> subset;
        for (int w = 0; w < L; ++w) {
          if (mask & (1u << w)) subset.push_back(all[static_cast<std::size_t>(w)]);
        }
        try {
          const auto decoded = decode_prefix(subset, sys);
          for (std::size_t i = 0; i < decoded.size(); ++i) worst = std::max(worst, relative_error(decoded[i], truth[i]));
        } catch (const std::exception& e) {
          return {false, "decode failed for " + cfg.to_string() + ": " + e.what()};
        }
        ++subsets;
      }
      ++configs;
      int pos = 0;
      while (pos < L && k[static_cast<std::size_t>(pos)] == 8) k[static_cast<std::size_t>(pos++)] = 0;
      if (pos == L) break;
      ++k[static_cast<std::size_t>(pos)];
    }
  }
  return {worst <= 1e-8, std::to_string(configs) + " configurations, " + std::to_string(subsets) +
                             " subsets, worst relative error " + fmt("%.3g", worst)};
}

// 2. Row budget formula against the exhaustive covering search.
Verdict formula_vs_oracle() {
  long cases = 0;
  long mismatches = 0;
  std::string first;
  for (int L = 1; L <= 5; ++L) {
    for (int i = 1; i <= L; ++i) {
      for (int k = 0; k <= 12; ++k) {
        ++cases;
        const auto f = row_count_s(i, k, L);
        const auto o = min_rows_oracle(L, i, k).objective;
        if (f != o) {
          if (first.empty()) first = " (first: L=" + std::to_string(L) + " i=" + std::to_string(i) + " k=" + std::to_string(k) + ")";
          ++mismatches;
        }
      }
    }
  }
  return {mismatches == 0, std::to_string(cases) + " cases, " + std::to_string(mismatches) + " mismatches" + first};
}

// 3. The three published configurations are feasible with zero slack.
Verdict example_configurations() {
  const std::vector<Configuration> cfgs{{4, 3, {0, 3, 3, 1}}, {4, 10, {0, 0, 6, 32}}, {4, 10, {5, 10, 0, 0}}};
  const std::vector<std::int64_t> expect{12, 40, 40};
  bool ok = true;
  std::string detail;
  for (std::size_t j = 0; j < cfgs.size(); ++j) {
    const auto b = check_feasible(cfgs[j]);
    ok = ok && b.feasible && b.total == expect[j] && b.capacity == expect[j];
    detail += cfgs[j].to_string() + " -> " + std::to_string(b.total) + "/" + std::to_string(b.capacity) + "; ";
  }
  return {ok, detail};
}

// 4. Order statistic means: analytic values and Monte Carlo agreement.
Verdict order_statistics() {
  const double published[] = {0.25, 0.58, 1.08, 2.08};
  const LatencyModel model = ExponentialLatency{1.0};
  const int rounds = 100000;
  std::vector<double> sum(4, 0.0), sum2(4, 0.0);
  SeededRng rng(4242);
  for (int r = 0; r < rounds; ++r) {
    const auto round = sample_round(model, 4, rng);
    for (int ell = 1; ell <= 4; ++ell) {
      const double t = round.elapsed(ell);
      sum[static_cast<std::size_t>(ell - 1)] += t;
      sum2[static_cast<std::size_t>(ell - 1)] += t * t;
    }
  }
  bool ok = true;
  std::string detail;
  for (int ell = 1; ell <= 4; ++ell) {
    const auto j = static_cast<std::size_t>(ell - 1);
    const double analytic = order_stat_mean(model, 4, ell);
    const double rounded = std::round(analytic * 100.0) / 100.0;
    const double mean = sum[j] / rounds;
    const double var = (sum2[j] - rounds * mean * mean) / (rounds - 1);
    const double se = std::sqrt(var / rounds);
    const double z = std::abs(mean - analytic) / se;
    ok = ok && std::abs(rounded - published[j]) < 1e-9 && z <= 3.0;
    detail += "l=" + std::to_string(ell) + " analytic " + fmt("%.4f", analytic) + " MC " + fmt("%.4f", mean) + " (" +
              fmt("%.2f", z) + " SE); ";
  }
  return {ok, detail};
}

// 5. Example 1 statistical reproduction.
Verdict example1(const ExperimentOutputs& out) {
  const auto& t = out.summary.thresholds.at(0);
  const bool ok = out.summary.replications >= 50 && t.paired >= 50 && t.reduction >= 0.15;
  return {ok, std::to_string(t.paired) + " pairs, mean time to 1e-3: baseline " + fmt("%.1f", t.baseline_mean) +
                  ", sequential " + fmt("%.1f", t.sequential_mean) + ", reduction " + fmt("%.2f", 100.0 * t.reduction) +
                  "% (need >= 15%)"};
}

// 6. Example 2 plateau and speedup.
Verdict example2(const ExperimentOutputs& out) {
  const auto& t = out.summary.thresholds.at(0);
  const double plateau = out.summary.mean_final_suboptimality_sequential;
  const bool ok = out.summary.replications >= 50 && plateau >= 0.02 && plateau <= 0.2 && t.paired > 0 && t.speedup >= 1.5;
  return {ok, "mean final suboptimality " + fmt("%.4f", plateau) + " (need [0.02, 0.2]), speedup to 0.2 " +
                  fmt("%.3f", t.speedup) + "x over " + std::to_string(t.paired) + " pairs (need >= 1.5x)"};
}

// 7. Iterates match in-memory ISTA; per-phase objective monotone; x* optimal.
Verdict solver_fidelity() {
  std::mt19937_64 gen(7);
  LassoProblem p;
  p.F = oracle::random_matrix(38, 120, gen);
  p.b = oracle::random_vector(38, gen);
  p.gamma = 0.2 * (p.F.transpose() * p.b).lpNorm<Eigen::Infinity>();
  const Configuration cfg = exact_configuration(4, 10, 38);
  const CodedLasso sys(p, cfg);
  const std::vector<PhaseSpec> full{{38, 200}};
  std::vector<Eigen::VectorXd> xs;
  RunOptions opts;
  opts.observer = [&](const IterationRecord&, const Eigen::VectorXd& x) { xs.push_back(x); };
  run_sequential(sys, make_schedule(cfg, full, 38), DeterministicLatency{1.0}, 1, opts);
  const auto ref = oracle::ista_iterates(p.F, p.b, p.gamma, sys.step_size(), 200);
  double worst_iter = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) worst_iter = std::max(worst_iter, relative_error(xs.at(k), ref[k]));

  // Monotonicity over multi-phase runs on both example configurations.
  long violations = 0;
  long checked = 0;
  const ProblemInstance inst = make_problem(example1_preset().problem, 1);
  const LassoProblem& q = inst.problem;
  const auto& factors = inst.factors;
  const std::vector<std::pair<Configuration, std::vector<PhaseSpec>>> runs{
      {Configuration{4, 10, {0, 0, 6, 32}}, {{6, 500}, {38, 500}}},
      {Configuration{4, 10, {5, 10, 0, 0}}, {{5, 300}, {15, 700}}},
      {Configuration{4, 10, {5, 10, 0, 0}}, {{5, 300}, {10, 300}, {15, 300}}}};
  for (const auto& [c, phases] : runs) {
    const CodedLasso s(q, factors, c);
    int phase = 0;
    double last = 0.0;
    RunOptions o;
    o.observer = [&](const IterationRecord& rec, const Eigen::VectorXd& x) {
      const double obj = phase_objective(s, phases[static_cast<std::size_t>(rec.phase - 1)].rank, x);
      if (rec.phase == phase) {
        ++checked;
        if (obj > last + 1e-12 * std::max(1.0, std::abs(last))) ++violations;
      }
      phase = rec.phase;
      last = obj;
    };
    run_sequential(s, make_schedule(c, phases, 38), ExponentialLatency{1.0}, 2, o);
  }

  const double resid = optimality_residual(q, inst.reference.x);
  const long support = (inst.reference.x.array() != 0.0).count();
  const bool ok = worst_iter <= 1e-8 && violations == 0 && resid <= 1e-10 && support > 0;
  return {ok, "worst iterate error " + fmt("%.3g", worst_iter) + " over 200 iterations; " + std::to_string(violations) +
                  "/" + std::to_string(checked) + " objective increases; x* residual " + fmt("%.3g", resid) + " with " +
                  std::to_string(support) + " nonzeros"};
}

// 8. Truncation error against power iteration.
Verdict eckart_young() {
  std::mt19937_64 gen(8);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd F = oracle::random_matrix(20, 40, gen);
    const auto f = compute_svd(F);
    for (int r = 1; r <= f.rank(); ++r) {
      const double err = oracle::spectral_norm(F - truncate_svd(f, r).dense());
      const double expect = r < f.rank() ? f.sigma(r) : 0.0;
      worst = std::max(worst, std::abs(err - expect));
    }
  }
  return {worst <= 1e-8, "5 matrices, every rank; worst |err - sigma_{r+1}| " + fmt("%.3g", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9. Two CLI processes with the same seed produce identical files.
Verdict determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "seqcode_acceptance_determinism";
  fs::remove_all(root);
  bool ok = true;
  std::string detail;
  for (const std::string preset : {"example1", "example2"}) {
    const std::string reps = preset == "example1" ? "2" : "3";
    for (const std::string run : {"a", "b"}) {
      const fs::path dir = root / (preset + run);
      const std::string cmd = "\"" + cli + "\" experiment --preset " + preset + " --seed 11 --replications " + reps +
                              " --all-traces --quiet --output \"" + dir.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "CLI invocation failed: " + cmd};
    }
    for (const char* file : {"trace.csv", "summary.csv"}) {
      const std::string a = slurp(root / (preset + "a") / file);
      const std::string b = slurp(root / (preset + "b") / file);
      const bool same = !a.empty() && a == b;
      ok = ok && same;
      detail += preset + "/" + file + (same ? " identical (" + std::to_string(a.size()) + " bytes); " : " DIFFERS; ");
    }
  }
  fs::remove_all(root);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to seqcode CLI>\n";
    return 100;
  }
  const std::string cli = argv[1];
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::cout << "criterion " << id << " [" << name << "]: " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << " ("
              << fmt("%.1f", secs) << " s)" << std::endl;
  };

  report(1, "coding round-trip", coding_round_trip);
  report(2, "row budget formula vs exhaustive oracle", formula_vs_oracle);
  report(3, "example configurations tight", example_configurations);
  report(4, "order-statistic means", order_statistics);
  report(5, "example 1 time to 1e-3", [] { return example1(run_experiment(example1_preset(), std::nullopt)); });
  report(6, "example 2 plateau and speedup", [] { return example2(run_experiment(example2_preset(), std::nullopt)); });
  report(7, "solver fidelity", solver_fidelity);
  report(8, "Eckart-Young", eckart_young);
  report(9, "determinism across processes", [&] { return determinism(cli); });

  std::cout << (9 - failures) << "/9 criteria passed" << std::endl;
  return failures;
}
