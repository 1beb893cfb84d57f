#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqcode/cluster.hpp"
#include "seqcode/codec.hpp"
#include "seqcode/feasibility.hpp"

namespace seqcode {

// minimize 1/2 ||F x - b||^2 + gamma ||x||_1
struct LassoProblem {
  Eigen::MatrixXd F;
  Eigen::VectorXd b;
  double gamma = 0.0;

  void validate() const;
};

double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& x);

// Thin SVD F = U diag(sigma) V^T restricted to the numerically nonzero
// singular values.
struct SvdFactors {
  Eigen::MatrixXd U;      // w x d
  Eigen::VectorXd sigma;  // d, nonincreasing, positive
  Eigen::MatrixXd V;      // m x d

  int rank() const { return static_cast<int>(sigma.size()); }
};

SvdFactors compute_svd(const Eigen::MatrixXd& F, double relative_cutoff = 1e-12);

// F_(r) = sum_{i<=rank} sigma_i u_i v_i^T, kept in factored form.
class LowRankView {
 public:
  LowRankView(const SvdFactors& factors, int rank);

  int rank() const { return rank_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;            // F_(r) x
  Eigen::VectorXd apply_gram(const Eigen::VectorXd& x) const;       // F_(r)^T F_(r) x
  Eigen::MatrixXd dense() const;

 private:
  const SvdFactors* factors_;
  int rank_;
};

LowRankView truncate_svd(const SvdFactors& factors, int rank);

// A_i = rows v_{h_{i-1}+1}^T .. v_{h_i}^T of V^T.
SourceMatrices build_level_blocks(const Eigen::MatrixXd& V, const Configuration& cfg);

struct Phase {
  int rank = 0;
  int iterations = 0;
  int responders = 0;  // l(r): workers to wait for
};

struct PhaseSpec {
  int rank = 0;
  int iterations = 0;
};

struct ApproxSchedule {
  Configuration config;
  std::vector<Phase> phases;
};

// Smallest l with h_l >= rank, or nullopt if the configuration never reaches it.
std::optional<int> responders_for_rank(const Configuration& cfg, int rank);

// Derives l(r) for each phase and validates ranks against the configuration
// and the matrix rank. Throws std::invalid_argument on inconsistency.
ApproxSchedule make_schedule(const Configuration& cfg, std::span<const PhaseSpec> phases, int matrix_rank);

// Everything fixed before iteration starts: SVD, encoded worker matrices and
// the exact linear term F^T b. Immutable after construction.
class CodedLasso {
 public:
  CodedLasso(LassoProblem problem, const Configuration& cfg);
  CodedLasso(LassoProblem problem, SvdFactors factors, const Configuration& cfg);

  const LassoProblem& problem() const { return problem_; }
  const SvdFactors& factors() const { return factors_; }
  const EncodedSystem& encoded() const { return encoded_; }
  const Configuration& config() const { return encoded_.config; }
  const Eigen::VectorXd& linear_term() const { return linear_term_; }
  // 1 / sigma_1^2
  double step_size() const { return step_; }

 private:
  LassoProblem problem_;
  SvdFactors factors_;
  EncodedSystem encoded_;
  Eigen::VectorXd linear_term_;
  double step_ = 0.0;
};

// (0, ..., 0, d) on (L, n); throws InfeasibleConfiguration if d > nL.
Configuration exact_configuration(int workers, int rows_per_worker, int rank);

struct MatvecResult {
  Eigen::VectorXd g;  // H_(r) x
  double elapsed = 0.0;
  std::vector<int> responders;
};

// One coded round: wait for l(r) workers, decode t_l = [v_1^T; ...] x and
// form H_(r) x = V_r diag(sigma_r^2) t on the user side.
MatvecResult sequential_matvec(const Eigen::VectorXd& x, const Phase& phase, const CodedLasso& system,
                               const LatencyModel& model, SeededRng& rng);

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double theta);

// 1/2 x^T H_(r) x - h^T x + 1/2 ||b||^2 + gamma ||x||_1 with the exact h = F^T b.
// Equals lasso_objective at full rank.
double phase_objective(const CodedLasso& system, int rank, const Eigen::VectorXd& x);

struct IterationRecord {
  long iteration = 0;  // 1-based
  int phase = 0;       // 1-based
  double iter_time = 0.0;
  double cum_time = 0.0;
  double objective = 0.0;
  double suboptimality = 0.0;
};

struct RunTrace {
  std::string algorithm;
  std::vector<IterationRecord> records;
  Eigen::VectorXd final_x;

  // First cumulative time at which suboptimality <= threshold.
  std::optional<double> time_to(double threshold) const;
};

struct RunOptions {
  // x* for the suboptimality column; NaN is recorded when absent.
  const Eigen::VectorXd* reference = nullptr;
  // End the run at the first iteration with suboptimality <= stop_below.
  std::optional<double> stop_below;
  // Charge a second, independent T_(l) wait per iteration for F_(r)^T (F_(r) x).
  bool charge_second_round = false;
  std::function<void(const IterationRecord&, const Eigen::VectorXd&)> observer;
};

// Proximal gradient through the coded cluster, one phase after another with a
// warm-started iterate.
RunTrace run_sequential(const CodedLasso& system, const ApproxSchedule& schedule, const LatencyModel& model,
                        std::uint64_t seed, const RunOptions& options = {});

// The unapproximated method: a single full-rank phase.
RunTrace run_baseline(const CodedLasso& system, int iterations, const LatencyModel& model, std::uint64_t seed,
                      const RunOptions& options = {});

// Lasso optimality violation of x (0 iff x is a minimizer).
double optimality_residual(const LassoProblem& problem, const Eigen::VectorXd& x);

struct ReferenceSolution {
  Eigen::VectorXd x;
  double residual = 0.0;
  long iterations = 0;
  bool converged = false;
};

// Exact-matrix proximal gradient with periodic support polishing, until the
// optimality residual drops to `tolerance`. Throws std::runtime_error when the
// cap is reached first.
ReferenceSolution reference_solution(const LassoProblem& problem, double tolerance = 1e-10,
                                     long max_iterations = 1'000'000);

}  // namespace seqcode
