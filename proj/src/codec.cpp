#include "seqcode/codec.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

namespace seqcode {

BlockSplit split_matrix(const Eigen::MatrixXd& a, int level) {
  if (level < 1) throw std::invalid_argument("level must be positive");
  BlockSplit out;
  out.level = level;
  const auto rows = static_cast<int>(a.rows());
  const int full = rows / level;
  const int rem = rows % level;
  out.full_blocks.reserve(static_cast<std::size_t>(full));
  for (int j = 0; j < full; ++j) out.full_blocks.emplace_back(a.middleRows(j * level, level));
  if (rem > 0) out.remainder = a.middleRows(full * level, rem);
  return out;
}

SystematicGenerator make_generator(int rows_in, int rows_out) {
  if (rows_in < 1 || rows_out < rows_in) throw std::invalid_argument("generator needs 1 <= rows_in <= rows_out");
  SystematicGenerator gen;
  gen.rows_in = rows_in;
  gen.rows_out = rows_out;
  gen.coefficients.setZero(rows_out, rows_in);
  gen.coefficients.topRows(rows_in).setIdentity();
  // Cauchy parity 1/(x_r - y_c) with x_r = r + 1/2, y_c = c. The two node sets
  // are disjoint and interleaved, which keeps small minors well conditioned.
  for (int r = 0; r < rows_out - rows_in; ++r) {
    for (int c = 0; c < rows_in; ++c) {
      gen.coefficients(rows_in + r, c) = 1.0 / ((r + 0.5) - c);
    }
  }
  if (rows_out <= 12 && !has_mds_property(gen)) {
    std::ostringstream msg;
    msg << "generator (" << rows_out << ',' << rows_in << ") failed the MDS self-check";
    throw std::logic_error(msg.str());
  }
  return gen;
}

bool has_mds_property(const SystematicGenerator& gen) {
  const int k = gen.rows_in;
  const int n = gen.rows_out;
  std::vector<int> pick(static_cast<std::size_t>(k));
  std::iota(pick.begin(), pick.end(), 0);
  Eigen::MatrixXd sub(k, k);
  while (true) {
    for (int r = 0; r < k; ++r) sub.row(r) = gen.coefficients.row(pick[static_cast<std::size_t>(r)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() < k) return false;
    // next k-combination of 0..n-1
    int pos = k - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < k; ++q) pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
  }
  return true;
}

EncodedSystem plan_layout(const Configuration& cfg) {
  const RowBudget budget = check_feasible(cfg);
  if (!budget.feasible) {
    std::ostringstream msg;
    msg << "configuration " << cfg.to_string() << " needs " << budget.total << " encoded rows but capacity is "
        << budget.capacity;
    throw InfeasibleConfiguration(msg.str());
  }
  const int L = cfg.workers;
  EncodedSystem sys;
  sys.config = cfg;

  // Full blocks: coded row r goes to worker r + 1.
  for (int i = 1; i <= L; ++i) {
    const int k = cfg.rows_at(i);
    for (int j = 0; j < k / i; ++j) {
      BlockLayout b{RowTag{i, j + 1, 0, false}, j * i, make_generator(i, L), {}};
      for (int r = 0; r < L; ++r) b.placements.push_back(RowPlacement{r + 1, -1});
      sys.blocks.push_back(std::move(b));
    }
  }
  std::vector<int> load(static_cast<std::size_t>(L), 0);
  for (const auto& b : sys.blocks) {
    for (const auto& p : b.placements) ++load[static_cast<std::size_t>(p.worker_id - 1)];
  }

  // Remainder blocks, increasing level, onto the least-loaded workers.
  std::vector<BlockLayout> tails;
  for (int i = 1; i <= L; ++i) {
    const int k = cfg.rows_at(i);
    const int rem = k % i;
    if (rem == 0) continue;
    const int holders = L - i + rem;
    std::vector<int> order(static_cast<std::size_t>(L));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return load[static_cast<std::size_t>(a)] < load[static_cast<std::size_t>(b)]; });
    order.resize(static_cast<std::size_t>(holders));
    std::sort(order.begin(), order.end());
    BlockLayout b{RowTag{i, k / i + 1, 0, true}, (k / i) * i, make_generator(rem, holders), {}};
    for (int w : order) {
      if (load[static_cast<std::size_t>(w)] + 1 > cfg.rows_per_worker) {
        std::ostringstream msg;
        msg << "no capacity-respecting placement for the level-" << i << " remainder block of " << cfg.to_string();
        throw PackingFailure(msg.str());
      }
      ++load[static_cast<std::size_t>(w)];
      b.placements.push_back(RowPlacement{w + 1, -1});
    }
    tails.push_back(std::move(b));
  }
  for (auto& b : tails) sys.blocks.push_back(std::move(b));
  std::stable_sort(sys.blocks.begin(), sys.blocks.end(), [](const BlockLayout& a, const BlockLayout& b) {
    return a.first.level != b.first.level ? a.first.level < b.first.level : a.first.block < b.first.block;
  });

  // Slots follow (level, block) order inside each worker.
  sys.workers.resize(static_cast<std::size_t>(L));
  for (int w = 0; w < L; ++w) sys.workers[static_cast<std::size_t>(w)].worker_id = w + 1;
  for (auto& b : sys.blocks) {
    for (int r = 0; r < static_cast<int>(b.placements.size()); ++r) {
      auto& p = b.placements[static_cast<std::size_t>(r)];
      auto& worker = sys.workers[static_cast<std::size_t>(p.worker_id - 1)];
      p.slot = static_cast<int>(worker.tags.size());
      RowTag tag = b.first;
      tag.coded_row = r;
      worker.tags.push_back(tag);
    }
  }
  return sys;
}

EncodedSystem encode_all(const SourceMatrices& src, const Configuration& cfg) {
  cfg.validate();
  if (static_cast<int>(src.levels.size()) != cfg.workers) {
    throw std::invalid_argument("source matrices do not match the configuration's level count");
  }
  for (int i = 1; i <= cfg.workers; ++i) {
    const auto& a = src.levels[static_cast<std::size_t>(i - 1)];
    if (a.rows() != cfg.rows_at(i) || (a.rows() > 0 && a.cols() != src.cols)) {
      std::ostringstream msg;
      msg << "A_" << i << " is " << a.rows() << 'x' << a.cols() << ", expected " << cfg.rows_at(i) << 'x' << src.cols;
      throw std::invalid_argument(msg.str());
    }
  }
  EncodedSystem sys = plan_layout(cfg);
  sys.cols = src.cols;
  for (auto& w : sys.workers) w.rows.setZero(static_cast<Eigen::Index>(w.tags.size()), src.cols);
  for (const auto& b : sys.blocks) {
    const auto& a = src.levels[static_cast<std::size_t>(b.first.level - 1)];
    const auto message = a.middleRows(b.source_offset, b.generator.rows_in);
    for (int r = 0; r < b.generator.rows_out; ++r) {
      const auto& p = b.placements[static_cast<std::size_t>(r)];
      sys.workers[static_cast<std::size_t>(p.worker_id - 1)].rows.row(p.slot) =
          b.generator.coefficients.row(r) * message;
    }
  }
  return sys;
}

WorkerResult worker_multiply(const WorkerMatrix& w, const Eigen::VectorXd& z) {
  if (w.rows.rows() > 0 && w.rows.cols() != z.size()) {
    std::ostringstream msg;
    msg << "worker " << w.worker_id << " holds " << w.rows.cols() << " columns but z has length " << z.size();
    throw std::invalid_argument(msg.str());
  }
  WorkerResult out;
  out.worker_id = w.worker_id;
  out.y = w.rows.rows() > 0 ? Eigen::VectorXd(w.rows * z) : Eigen::VectorXd(0);
  out.tags = w.tags;
  return out;
}

std::vector<Eigen::VectorXd> decode_prefix(std::span<const WorkerResult> results, const EncodedSystem& sys) {
  return decode_prefix(results, sys, static_cast<int>(results.size()));
}

std::vector<Eigen::VectorXd> decode_prefix(std::span<const WorkerResult> results, const EncodedSystem& sys,
                                           int max_level) {
  const int L = sys.config.workers;
  const auto responding = static_cast<int>(results.size());
  if (responding > L) throw std::invalid_argument("more results than workers");
  if (max_level < 0 || max_level > responding) throw std::invalid_argument("cannot decode beyond the responder count");

  std::vector<const WorkerResult*> by_worker(static_cast<std::size_t>(L), nullptr);
  for (const auto& r : results) {
    if (r.worker_id < 1 || r.worker_id > L) throw std::invalid_argument("result from an unknown worker");
    auto& slot = by_worker[static_cast<std::size_t>(r.worker_id - 1)];
    if (slot) throw std::invalid_argument("duplicate result for one worker");
    const auto expected = sys.workers[static_cast<std::size_t>(r.worker_id - 1)].tags.size();
    if (static_cast<std::size_t>(r.y.size()) != expected) throw std::invalid_argument("result length does not match worker rows");
    slot = &r;
  }

  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(max_level));
  for (int i = 1; i <= max_level; ++i) out.emplace_back(Eigen::VectorXd::Zero(sys.config.rows_at(i)));

  std::vector<int> chosen;
  for (const auto& b : sys.blocks) {
    if (b.first.level > max_level) break;
    const int need = b.generator.rows_in;
    chosen.clear();
    for (int r = 0; r < b.generator.rows_out && static_cast<int>(chosen.size()) < need; ++r) {
      if (by_worker[static_cast<std::size_t>(b.placements[static_cast<std::size_t>(r)].worker_id - 1)]) chosen.push_back(r);
    }
    if (static_cast<int>(chosen.size()) < need) {
      std::ostringstream msg;
      msg << "level " << b.first.level << " block " << b.first.block << " needs " << need << " coded rows, got "
          << chosen.size();
      throw InsufficientResults(msg.str());
    }
    Eigen::MatrixXd g(need, need);
    Eigen::VectorXd y(need);
    bool identity = true;
    for (int q = 0; q < need; ++q) {
      const int r = chosen[static_cast<std::size_t>(q)];
      const auto& p = b.placements[static_cast<std::size_t>(r)];
      g.row(q) = b.generator.coefficients.row(r);
      y(q) = by_worker[static_cast<std::size_t>(p.worker_id - 1)]->y(p.slot);
      identity = identity && r == q;
    }
    auto target = out[static_cast<std::size_t>(b.first.level - 1)].segment(b.source_offset, need);
    if (identity) {
      target = y;
    } else {
      target = g.partialPivLu().solve(y);
    }
  }
  return out;
}

void write_provenance_csv(std::ostream& out, const EncodedSystem& sys) {
  out << "worker_id,level,block,coded_row,kind,coefficients\n";
  char buf[32];
  for (const auto& w : sys.workers) {
    for (const auto& tag : w.tags) {
      const auto it = std::find_if(sys.blocks.begin(), sys.blocks.end(), [&](const BlockLayout& b) {
        return b.first.level == tag.level && b.first.block == tag.block;
      });
      const auto& gen = it->generator;
      out << w.worker_id << ',' << tag.level << ',' << tag.block << ',' << tag.coded_row << ','
          << (tag.remainder ? "remainder-" : "") << (tag.systematic(gen.rows_in) ? "systematic" : "parity") << ',';
      for (int c = 0; c < gen.rows_in; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", gen.coefficients(tag.coded_row, c));
        out << (c ? " " : "") << buf;
      }
      out << '\n';
    }
  }
}

double relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& truth) {
  if (got.size() != truth.size()) throw std::invalid_argument("relative_error: size mismatch");
  if (truth.size() == 0) return 0.0;
  const double denom = std::max(1.0, truth.lpNorm<Eigen::Infinity>());
  return (got - truth).lpNorm<Eigen::Infinity>() / denom;
}

}  // namespace seqcode
