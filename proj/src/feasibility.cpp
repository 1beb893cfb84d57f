#include "seqcode/feasibility.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace seqcode {

void Configuration::validate() const {
  if (workers < 1) throw std::invalid_argument("configuration needs at least one worker");
  if (rows_per_worker < 1) throw std::invalid_argument("configuration needs at least one row per worker");
  if (level_count() != workers) {
    std::ostringstream msg;
    msg << "configuration has " << level_count() << " levels but " << workers << " workers";
    throw std::invalid_argument(msg.str());
  }
  for (int k : level_rows) {
    if (k < 0) throw std::invalid_argument("level row counts must be non-negative");
  }
}

int Configuration::cumulative_rows(int level) const {
  if (level < 0 || level > level_count()) throw std::out_of_range("level index out of range");
  return std::accumulate(level_rows.begin(), level_rows.begin() + level, 0);
}

std::string Configuration::to_string() const {
  std::ostringstream out;
  out << "(L=" << workers << ", n=" << rows_per_worker << ", k=(";
  for (std::size_t i = 0; i < level_rows.size(); ++i) {
    if (i) out << ',';
    out << level_rows[i];
  }
  out << "))";
  return out.str();
}

std::int64_t row_count_s(int level, int rows, int workers) {
  if (workers < 1 || level < 1 || level > workers) {
    throw std::invalid_argument("level must lie in 1..L");
  }
  if (rows < 0) throw std::invalid_argument("row count must be non-negative");
  const std::int64_t full = rows / level;
  const std::int64_t rem = rows % level;
  if (rem == 0) return full * workers;
  return full * workers + workers - level + rem;
}

RowBudget check_feasible(const Configuration& cfg) {
  cfg.validate();
  RowBudget budget;
  budget.per_level.reserve(cfg.level_rows.size());
  for (int i = 1; i <= cfg.workers; ++i) {
    budget.per_level.push_back(row_count_s(i, cfg.rows_at(i), cfg.workers));
  }
  budget.total = std::accumulate(budget.per_level.begin(), budget.per_level.end(), std::int64_t{0});
  budget.capacity = static_cast<std::int64_t>(cfg.rows_per_worker) * cfg.workers;
  budget.feasible = budget.total <= budget.capacity;
  return budget;
}

namespace {

// Depth-first search over nonincreasing allocations a[0] >= a[1] >= ... . Any
// allocation can be sorted without changing its objective or the set of
// subset sums, and capping an entry at `rows` never breaks a constraint, so
// this covers every optimum.
class CoveringSearch {
 public:
  CoveringSearch(int workers, int level, int rows)
      : workers_(workers), level_(level), rows_(rows), current_(static_cast<std::size_t>(workers), 0) {}

  ConverseInstance run() {
    best_total_ = std::numeric_limits<std::int64_t>::max();
    descend(0, rows_, 0);
    ConverseInstance out;
    out.workers = workers_;
    out.level = level_;
    out.rows = rows_;
    out.allocation = best_;
    out.objective = best_total_;
    return out;
  }

 private:
  void descend(int pos, int upper, std::int64_t total) {
    if (total >= best_total_) return;
    if (pos == workers_) {
      // For a sorted allocation the weakest level-subset is the last `level` entries.
      const std::int64_t weakest = std::accumulate(current_.end() - level_, current_.end(), std::int64_t{0});
      if (weakest >= rows_) {
        best_total_ = total;
        best_ = current_;
      }
      return;
    }
    // Entries from pos onward are bounded by `upper`; the tail subset can
    // collect at most level * upper (fewer if pos is already inside it).
    const int tail_start = workers_ - level_;
    const std::int64_t fixed_tail =
        pos > tail_start ? std::accumulate(current_.begin() + tail_start, current_.begin() + pos, std::int64_t{0}) : 0;
    const int open_tail = workers_ - std::max(pos, tail_start);
    if (fixed_tail + static_cast<std::int64_t>(open_tail) * upper < rows_) return;

    for (int v = upper; v >= 0; --v) {
      current_[static_cast<std::size_t>(pos)] = v;
      descend(pos + 1, v, total + v);
    }
    current_[static_cast<std::size_t>(pos)] = 0;
  }

  int workers_;
  int level_;
  int rows_;
  std::vector<int> current_;
  std::vector<int> best_;
  std::int64_t best_total_ = 0;
};

}  // namespace

ConverseInstance min_rows_oracle(int workers, int level, int rows, const OracleLimits& limits) {
  if (workers < 1 || level < 1 || level > workers) throw std::invalid_argument("level must lie in 1..L");
  if (rows < 0) throw std::invalid_argument("row count must be non-negative");
  if (workers > limits.max_workers || rows > limits.max_rows) {
    std::ostringstream msg;
    msg << "oracle instance (L=" << workers << ", k=" << rows << ") exceeds search limits (L<="
        << limits.max_workers << ", k<=" << limits.max_rows << ")";
    throw std::invalid_argument(msg.str());
  }
  return CoveringSearch(workers, level, rows).run();
}

namespace {

struct ConfigEnumerator {
  int workers;
  int rows_per_worker;
  std::span<const RankTarget> targets;
  const ConfigSearchOptions& options;
  std::vector<Configuration>& out;
  std::vector<int> k;

  bool full() const { return options.max_results != 0 && out.size() >= options.max_results; }

  // Every target whose responder count equals `level` must be met by h_level.
  bool targets_met_at(int level, int cumulative) const {
    for (const auto& t : targets) {
      if (t.responders == level && cumulative < t.rank) return false;
    }
    return true;
  }

  void descend(int level, std::int64_t budget_left, int cumulative) {
    if (full()) return;
    if (level > workers) {
      out.push_back(Configuration{workers, rows_per_worker, k});
      return;
    }
    const int rows_cap = options.max_total_rows ? *options.max_total_rows - cumulative : std::numeric_limits<int>::max();
    for (int rows = 0; rows <= rows_cap; ++rows) {
      const std::int64_t cost = row_count_s(level, rows, workers);
      // s_i is nondecreasing in k_i, so the first overflow ends the loop.
      if (cost > budget_left) break;
      if (!targets_met_at(level, cumulative + rows)) continue;
      k[static_cast<std::size_t>(level - 1)] = rows;
      descend(level + 1, budget_left - cost, cumulative + rows);
      if (full()) return;
    }
    k[static_cast<std::size_t>(level - 1)] = 0;
  }
};

void check_targets(int workers, std::span<const RankTarget> targets) {
  int prev_rank = -1;
  int prev_responders = 0;
  for (const auto& t : targets) {
    if (t.responders < 1 || t.responders > workers) throw std::invalid_argument("target responder count outside 1..L");
    if (t.rank < 0) throw std::invalid_argument("target rank must be non-negative");
    if (t.rank < prev_rank || t.responders < prev_responders) {
      throw std::invalid_argument("rank targets must be nondecreasing in rank and responder count");
    }
    prev_rank = t.rank;
    prev_responders = t.responders;
  }
}

}  // namespace

std::vector<Configuration> feasible_configs(int workers, int rows_per_worker, std::span<const RankTarget> targets,
                                            const ConfigSearchOptions& options) {
  if (workers < 1 || rows_per_worker < 1) throw std::invalid_argument("cluster needs L >= 1 and n >= 1");
  check_targets(workers, targets);
  std::vector<Configuration> out;
  ConfigEnumerator walker{workers, rows_per_worker, targets, options, out, std::vector<int>(static_cast<std::size_t>(workers), 0)};
  walker.descend(1, static_cast<std::int64_t>(workers) * rows_per_worker, 0);
  return out;
}

std::optional<Configuration> select_configuration(int workers, int rows_per_worker, std::span<const RankTarget> targets,
                                                  const ConfigSearchOptions& options) {
  ConfigSearchOptions all = options;
  all.max_results = 0;
  const auto candidates = feasible_configs(workers, rows_per_worker, targets, all);
  std::optional<Configuration> best;
  std::int64_t best_total = 0;
  for (const auto& c : candidates) {
    const auto total = check_feasible(c).total;
    // Candidates arrive in lexicographic order, so strict improvement keeps the first tie.
    if (!best || total < best_total) {
      best = c;
      best_total = total;
    }
  }
  return best;
}

}  // namespace seqcode
