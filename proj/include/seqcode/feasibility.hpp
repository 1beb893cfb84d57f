#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seqcode {

// Cluster shape (L workers, n rows per worker) plus the per-level row counts
// k_1..k_L. Level i holds the rows that must be recoverable from any i
// responding workers.
struct Configuration {
  int workers = 0;
  int rows_per_worker = 0;
  std::vector<int> level_rows;

  // Throws std::invalid_argument when the shape is inconsistent.
  void validate() const;

  int level_count() const { return static_cast<int>(level_rows.size()); }
  // k_i for a 1-based level index.
  int rows_at(int level) const { return level_rows.at(static_cast<std::size_t>(level - 1)); }
  // h_l = k_1 + ... + k_l.
  int cumulative_rows(int level) const;
  int total_rows() const { return cumulative_rows(level_count()); }

  std::string to_string() const;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// Encoded-row budget of a configuration: s_i per level against capacity nL.
struct RowBudget {
  std::vector<std::int64_t> per_level;
  std::int64_t total = 0;
  std::int64_t capacity = 0;
  bool feasible = false;
};

// Encoded rows consumed by a level-`level` matrix with `rows` rows on a
// cluster of `workers` workers.
std::int64_t row_count_s(int level, int rows, int workers);

RowBudget check_feasible(const Configuration& cfg);

// Limits on the exhaustive converse search.
struct OracleLimits {
  int max_workers = 6;
  int max_rows = 24;
};

// One optimal solution of the row-allocation covering problem: allocation[l]
// rows on worker l such that every `level`-subset of workers holds at least
// `rows` rows in total.
struct ConverseInstance {
  int workers = 0;
  int level = 0;
  int rows = 0;
  std::vector<int> allocation;
  std::int64_t objective = 0;
};

// Exact minimum of the covering problem by exhaustive search over sorted
// allocations. Independent of row_count_s. Throws std::invalid_argument for
// instances above `limits`.
ConverseInstance min_rows_oracle(int workers, int level, int rows, const OracleLimits& limits = {});

// Rank requirement of one approximation phase: the first `rank` rows must be
// recoverable from any `responders` workers.
struct RankTarget {
  int rank = 0;
  int responders = 0;
};

struct ConfigSearchOptions {
  // Upper bound on k_1 + ... + k_L (e.g. the rank of the matrix being coded).
  std::optional<int> max_total_rows;
  // Stop after this many hits; 0 means enumerate everything.
  std::size_t max_results = 0;
};

// All configurations on (workers, rows_per_worker) that fit the row budget and
// meet every target, in lexicographic order of (k_1, ..., k_L).
std::vector<Configuration> feasible_configs(int workers, int rows_per_worker,
                                            std::span<const RankTarget> targets,
                                            const ConfigSearchOptions& options = {});

// Preferred witness among feasible_configs: smallest total encoded rows,
// ties broken lexicographically.
std::optional<Configuration> select_configuration(int workers, int rows_per_worker,
                                                  std::span<const RankTarget> targets,
                                                  const ConfigSearchOptions& options = {});

}  // namespace seqcode
