#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace seqcode {

struct ExponentialLatency {
  double rate = 1.0;
  friend bool operator==(const ExponentialLatency&, const ExponentialLatency&) = default;
};

struct DeterministicLatency {
  double value = 1.0;
  friend bool operator==(const DeterministicLatency&, const DeterministicLatency&) = default;
};

struct ShiftedExponentialLatency {
  double shift = 0.0;
  double rate = 1.0;
  friend bool operator==(const ShiftedExponentialLatency&, const ShiftedExponentialLatency&) = default;
};

using LatencyModel = std::variant<ExponentialLatency, DeterministicLatency, ShiftedExponentialLatency>;

void validate(const LatencyModel& model);
std::string describe(const LatencyModel& model);

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Counter-based stream: the draw for (round, worker) is a pure function of
// the seed, so substreams are independent of call order.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t rounds_used() const { return next_round_; }

  // Uniform in (0, 1].
  double uniform(std::uint64_t round, int worker) const;
  std::uint64_t next_round() { return next_round_++; }

  // Seed for a named child stream (e.g. replication r, baseline vs sequential).
  std::uint64_t derive(std::uint64_t tag) const { return mix64(seed_ ^ mix64(tag + 0x632be59bd9b4e019ULL)); }

 private:
  std::uint64_t seed_;
  std::uint64_t next_round_ = 0;
};

double draw_latency(const LatencyModel& model, double u);

// One synchronous round: finish time of every worker and arrival order.
struct RoundOutcome {
  std::vector<double> finish_times;  // indexed by worker_id - 1
  std::vector<int> arrival_order;    // worker ids, earliest first, ties by id

  // T_(l), the l-th smallest finish time (1-based).
  double elapsed(int ell) const;
};

RoundOutcome sample_round(const LatencyModel& model, int workers, SeededRng& rng);

// E[T_(l)] for L i.i.d. workers.
double order_stat_mean(const LatencyModel& model, int workers, int ell);

struct WaitOutcome {
  double elapsed = 0.0;
  std::vector<int> responders;  // worker ids in arrival order
};

WaitOutcome simulate_wait(const LatencyModel& model, int workers, int ell, SeededRng& rng);

}  // namespace seqcode
