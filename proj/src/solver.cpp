#include "seqcode/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace seqcode {

void LassoProblem::validate() const {
  if (F.rows() == 0 || F.cols() == 0) throw std::invalid_argument("lasso matrix is empty");
  if (b.size() != F.rows()) throw std::invalid_argument("lasso right-hand side does not match F's row count");
  if (!(gamma >= 0)) throw std::invalid_argument("lasso regularization weight must be >= 0");
}

double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& x) {
  return 0.5 * (problem.F * x - problem.b).squaredNorm() + problem.gamma * x.lpNorm<1>();
}

SvdFactors compute_svd(const Eigen::MatrixXd& F, double relative_cutoff) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index d = 0;
  const double floor = s.size() > 0 ? s(0) * relative_cutoff : 0.0;
  while (d < s.size() && s(d) > floor) ++d;
  SvdFactors out;
  out.U = svd.matrixU().leftCols(d);
  out.sigma = s.head(d);
  out.V = svd.matrixV().leftCols(d);
  return out;
}

LowRankView::LowRankView(const SvdFactors& factors, int rank) : factors_(&factors), rank_(rank) {
  if (rank < 1 || rank > factors.rank()) {
    std::ostringstream msg;
    msg << "truncation rank " << rank << " outside 1.." << factors.rank();
    throw std::invalid_argument(msg.str());
  }
}

Eigen::VectorXd LowRankView::apply(const Eigen::VectorXd& x) const {
  const auto r = static_cast<Eigen::Index>(rank_);
  return factors_->U.leftCols(r) * (factors_->sigma.head(r).cwiseProduct(factors_->V.leftCols(r).transpose() * x));
}

Eigen::VectorXd LowRankView::apply_gram(const Eigen::VectorXd& x) const {
  const auto r = static_cast<Eigen::Index>(rank_);
  const auto Vr = factors_->V.leftCols(r);
  return Vr * (factors_->sigma.head(r).array().square().matrix().cwiseProduct(Vr.transpose() * x));
}

Eigen::MatrixXd LowRankView::dense() const {
  const auto r = static_cast<Eigen::Index>(rank_);
  return factors_->U.leftCols(r) * factors_->sigma.head(r).asDiagonal() * factors_->V.leftCols(r).transpose();
}

LowRankView truncate_svd(const SvdFactors& factors, int rank) { return LowRankView(factors, rank); }

SourceMatrices build_level_blocks(const Eigen::MatrixXd& V, const Configuration& cfg) {
  cfg.validate();
  if (cfg.total_rows() > V.cols()) {
    std::ostringstream msg;
    msg << "configuration stacks " << cfg.total_rows() << " singular vectors but only " << V.cols() << " exist";
    throw std::invalid_argument(msg.str());
  }
  SourceMatrices src;
  src.cols = static_cast<int>(V.rows());
  int offset = 0;
  for (int i = 1; i <= cfg.workers; ++i) {
    const int k = cfg.rows_at(i);
    src.levels.emplace_back(V.middleCols(offset, k).transpose());
    offset += k;
  }
  return src;
}

std::optional<int> responders_for_rank(const Configuration& cfg, int rank) {
  int h = 0;
  for (int l = 1; l <= cfg.workers; ++l) {
    h += cfg.rows_at(l);
    if (h >= rank) return l;
  }
  return std::nullopt;
}

ApproxSchedule make_schedule(const Configuration& cfg, std::span<const PhaseSpec> phases, int matrix_rank) {
  cfg.validate();
  if (phases.empty()) throw std::invalid_argument("schedule needs at least one phase");
  if (cfg.total_rows() > matrix_rank) throw std::invalid_argument("configuration stacks more rows than the matrix rank");
  ApproxSchedule out;
  out.config = cfg;
  int prev_rank = 0;
  for (const auto& p : phases) {
    if (p.rank <= prev_rank) throw std::invalid_argument("phase ranks must be strictly increasing");
    if (p.rank > matrix_rank) throw std::invalid_argument("phase rank exceeds the matrix rank");
    if (p.iterations < 0) throw std::invalid_argument("phase iteration count must be >= 0");
    const auto ell = responders_for_rank(cfg, p.rank);
    if (!ell) {
      std::ostringstream msg;
      msg << "configuration " << cfg.to_string() << " never recovers rank " << p.rank;
      throw std::invalid_argument(msg.str());
    }
    out.phases.push_back(Phase{p.rank, p.iterations, *ell});
    prev_rank = p.rank;
  }
  return out;
}

CodedLasso::CodedLasso(LassoProblem problem, const Configuration& cfg)
    : CodedLasso(problem, compute_svd(problem.F), cfg) {}

CodedLasso::CodedLasso(LassoProblem problem, SvdFactors factors, const Configuration& cfg)
    : problem_(std::move(problem)), factors_(std::move(factors)) {
  problem_.validate();
  if (factors_.rank() == 0) throw std::invalid_argument("lasso matrix has rank zero");
  encoded_ = encode_all(build_level_blocks(factors_.V, cfg), cfg);
  linear_term_ = problem_.F.transpose() * problem_.b;
  step_ = 1.0 / (factors_.sigma(0) * factors_.sigma(0));
}

Configuration exact_configuration(int workers, int rows_per_worker, int rank) {
  Configuration cfg{workers, rows_per_worker, std::vector<int>(static_cast<std::size_t>(workers), 0)};
  cfg.level_rows.back() = rank;
  if (!check_feasible(cfg).feasible) {
    std::ostringstream msg;
    msg << "rank " << rank << " does not fit on " << workers << " workers with " << rows_per_worker << " rows each";
    throw InfeasibleConfiguration(msg.str());
  }
  return cfg;
}

MatvecResult sequential_matvec(const Eigen::VectorXd& x, const Phase& phase, const CodedLasso& system,
                               const LatencyModel& model, SeededRng& rng) {
  const auto& cfg = system.config();
  if (x.size() != system.problem().F.cols()) throw std::invalid_argument("iterate has the wrong length");
  if (phase.responders < 1 || phase.responders > cfg.workers || cfg.cumulative_rows(phase.responders) < phase.rank) {
    throw std::invalid_argument("phase responder count cannot deliver its rank");
  }
  WaitOutcome wait = simulate_wait(model, cfg.workers, phase.responders, rng);

  std::vector<WorkerResult> results;
  results.reserve(wait.responders.size());
  for (int id : wait.responders) {
    results.push_back(worker_multiply(system.encoded().workers[static_cast<std::size_t>(id - 1)], x));
  }
  const auto levels = decode_prefix(results, system.encoded(), phase.responders);

  const auto r = static_cast<Eigen::Index>(phase.rank);
  Eigen::VectorXd t(r);
  Eigen::Index filled = 0;
  for (const auto& part : levels) {
    const Eigen::Index take = std::min<Eigen::Index>(part.size(), r - filled);
    t.segment(filled, take) = part.head(take);
    filled += take;
    if (filled == r) break;
  }
  const auto& f = system.factors();
  MatvecResult out;
  out.g = f.V.leftCols(r) * f.sigma.head(r).array().square().matrix().cwiseProduct(t);
  out.elapsed = wait.elapsed;
  out.responders = std::move(wait.responders);
  return out;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double theta) {
  if (!(theta >= 0)) throw std::invalid_argument("soft-threshold level must be >= 0");
  return v.unaryExpr([theta](double e) {
    if (e >= theta) return e - theta;
    if (e <= -theta) return e + theta;
    return 0.0;
  });
}

double phase_objective(const CodedLasso& system, int rank, const Eigen::VectorXd& x) {
  const LowRankView view(system.factors(), rank);
  const auto& p = system.problem();
  return 0.5 * x.dot(view.apply_gram(x)) - system.linear_term().dot(x) + 0.5 * p.b.squaredNorm() +
         p.gamma * x.lpNorm<1>();
}

std::optional<double> RunTrace::time_to(double threshold) const {
  for (const auto& rec : records) {
    if (rec.suboptimality <= threshold) return rec.cum_time;
  }
  return std::nullopt;
}

RunTrace run_sequential(const CodedLasso& system, const ApproxSchedule& schedule, const LatencyModel& model,
                        std::uint64_t seed, const RunOptions& options) {
  validate(model);
  if (!(schedule.config == system.config())) throw std::invalid_argument("schedule and encoded system use different configurations");
  const auto& p = system.problem();
  if (options.reference && options.reference->size() != p.F.cols()) throw std::invalid_argument("reference has the wrong length");

  SeededRng rng(seed);
  RunTrace trace;
  trace.algorithm = "sequential";
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.F.cols());
  const double t = system.step_size();
  const double ref_norm = options.reference ? options.reference->norm() : 0.0;
  double clock = 0.0;
  long k = 0;
  for (std::size_t r = 0; r < schedule.phases.size(); ++r) {
    const Phase& phase = schedule.phases[r];
    for (int it = 0; it < phase.iterations; ++it) {
      MatvecResult mv = sequential_matvec(x, phase, system, model, rng);
      double spent = mv.elapsed;
      if (options.charge_second_round) spent += simulate_wait(model, system.config().workers, phase.responders, rng).elapsed;
      x = soft_threshold(x - t * (mv.g - system.linear_term()), t * p.gamma);
      clock += spent;

      IterationRecord rec;
      rec.iteration = ++k;
      rec.phase = static_cast<int>(r) + 1;
      rec.iter_time = spent;
      rec.cum_time = clock;
      rec.objective = lasso_objective(p, x);
      rec.suboptimality = options.reference ? (x - *options.reference).norm() / ref_norm
                                            : std::numeric_limits<double>::quiet_NaN();
      trace.records.push_back(rec);
      if (options.observer) options.observer(rec, x);
      if (options.stop_below && rec.suboptimality <= *options.stop_below) {
        trace.final_x = x;
        return trace;
      }
    }
  }
  trace.final_x = x;
  return trace;
}

RunTrace run_baseline(const CodedLasso& system, int iterations, const LatencyModel& model, std::uint64_t seed,
                      const RunOptions& options) {
  const PhaseSpec full{system.factors().rank(), iterations};
  const ApproxSchedule schedule = make_schedule(system.config(), std::span(&full, 1), system.factors().rank());
  RunTrace trace = run_sequential(system, schedule, model, seed, options);
  trace.algorithm = "baseline";
  return trace;
}

double optimality_residual(const LassoProblem& problem, const Eigen::VectorXd& x) {
  const Eigen::VectorXd g = problem.F.transpose() * (problem.F * x - problem.b);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i) != 0.0 ? std::abs(g(i) + problem.gamma * (x(i) > 0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g(i)) - problem.gamma);
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

// Solves the lasso stationarity conditions restricted to the current support
// and sign pattern. Returns nullopt when the support is not identifiable.
std::optional<Eigen::VectorXd> polish_support(const LassoProblem& problem, const Eigen::VectorXd& x) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) support.push_back(i);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  if (support.empty()) return out;
  const auto s = static_cast<Eigen::Index>(support.size());
  if (s > problem.F.rows()) return std::nullopt;
  Eigen::MatrixXd Fs(problem.F.rows(), s);
  Eigen::VectorXd signs(s);
  for (Eigen::Index j = 0; j < s; ++j) {
    Fs.col(j) = problem.F.col(support[static_cast<std::size_t>(j)]);
    signs(j) = x(support[static_cast<std::size_t>(j)]) > 0 ? 1.0 : -1.0;
  }
  // (Fs^T Fs) xs = Fs^T b - gamma * signs, via Fs = QR.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Fs);
  if (qr.rank() < s) return std::nullopt;
  const Eigen::VectorXd rhs = Fs.transpose() * problem.b - problem.gamma * signs;
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(s, s).triangularView<Eigen::Upper>();
  // Fs P = Q R, so Fs^T Fs = P R^T R P^T.
  const Eigen::VectorXd permuted = qr.colsPermutation().transpose() * rhs;
  const Eigen::VectorXd z = R.triangularView<Eigen::Upper>().solve(
      R.transpose().triangularView<Eigen::Lower>().solve(permuted));
  const Eigen::VectorXd xs = qr.colsPermutation() * z;
  for (Eigen::Index j = 0; j < s; ++j) out(support[static_cast<std::size_t>(j)]) = xs(j);
  return out;
}

}  // namespace

ReferenceSolution reference_solution(const LassoProblem& problem, double tolerance, long max_iterations) {
  problem.validate();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(problem.F);
  const double sigma1 = svd.singularValues()(0);
  ReferenceSolution out;
  out.x = Eigen::VectorXd::Zero(problem.F.cols());
  if (sigma1 == 0.0) {
    out.residual = optimality_residual(problem, out.x);
    out.converged = out.residual <= tolerance;
    return out;
  }
  const double t = 1.0 / (sigma1 * sigma1);
  constexpr long kPolishEvery = 50;
  for (long k = 0; k <= max_iterations; ++k) {
    if (k % kPolishEvery == 0) {
      const double r = optimality_residual(problem, out.x);
      if (r <= tolerance) {
        out.residual = r;
        out.iterations = k;
        out.converged = true;
        return out;
      }
      if (auto cand = polish_support(problem, out.x)) {
        const double rc = optimality_residual(problem, *cand);
        if (rc <= tolerance) {
          out.x = *cand;
          out.residual = rc;
          out.iterations = k;
          out.converged = true;
          return out;
        }
      }
    }
    out.x = soft_threshold(out.x - t * (problem.F.transpose() * (problem.F * out.x - problem.b)), t * problem.gamma);
  }
  out.residual = optimality_residual(problem, out.x);
  out.iterations = max_iterations;
  std::ostringstream msg;
  msg << "reference solution did not reach residual " << tolerance << " within " << max_iterations
      << " iterations (residual " << out.residual << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace seqcode
