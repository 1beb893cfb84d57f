#include "seqcode/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace seqcode {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

void validate(const LatencyModel& model) {
  std::visit(overloaded{
                 [](const ExponentialLatency& m) {
                   if (!(m.rate > 0)) throw std::invalid_argument("exponential latency needs rate > 0");
                 },
                 [](const DeterministicLatency& m) {
                   if (!(m.value >= 0)) throw std::invalid_argument("deterministic latency must be >= 0");
                 },
                 [](const ShiftedExponentialLatency& m) {
                   if (!(m.rate > 0)) throw std::invalid_argument("shifted-exponential latency needs rate > 0");
                   if (!(m.shift >= 0)) throw std::invalid_argument("shifted-exponential shift must be >= 0");
                 },
             },
             model);
}

std::string describe(const LatencyModel& model) {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const ExponentialLatency& m) { out << "exponential(rate=" << m.rate << ")"; },
                 [&](const DeterministicLatency& m) { out << "deterministic(" << m.value << ")"; },
                 [&](const ShiftedExponentialLatency& m) {
                   out << "shifted-exponential(shift=" << m.shift << ", rate=" << m.rate << ")";
                 },
             },
             model);
  return out.str();
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double SeededRng::uniform(std::uint64_t round, int worker) const {
  const std::uint64_t bits = mix64(mix64(seed_ ^ mix64(round)) + static_cast<std::uint64_t>(worker));
  // 53 random bits mapped onto (0, 1].
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

double draw_latency(const LatencyModel& model, double u) {
  return std::visit(overloaded{
                        [&](const ExponentialLatency& m) { return -std::log(u) / m.rate; },
                        [](const DeterministicLatency& m) { return m.value; },
                        [&](const ShiftedExponentialLatency& m) { return m.shift - std::log(u) / m.rate; },
                    },
                    model);
}

double RoundOutcome::elapsed(int ell) const {
  if (ell < 1 || ell > static_cast<int>(arrival_order.size())) throw std::out_of_range("order statistic index out of range");
  return finish_times[static_cast<std::size_t>(arrival_order[static_cast<std::size_t>(ell - 1)] - 1)];
}

RoundOutcome sample_round(const LatencyModel& model, int workers, SeededRng& rng) {
  if (workers < 1) throw std::invalid_argument("need at least one worker");
  const std::uint64_t round = rng.next_round();
  RoundOutcome out;
  out.finish_times.resize(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    out.finish_times[static_cast<std::size_t>(w)] = draw_latency(model, rng.uniform(round, w));
  }
  out.arrival_order.resize(static_cast<std::size_t>(workers));
  std::iota(out.arrival_order.begin(), out.arrival_order.end(), 1);
  std::stable_sort(out.arrival_order.begin(), out.arrival_order.end(), [&](int a, int b) {
    return out.finish_times[static_cast<std::size_t>(a - 1)] < out.finish_times[static_cast<std::size_t>(b - 1)];
  });
  return out;
}

double order_stat_mean(const LatencyModel& model, int workers, int ell) {
  if (ell < 1 || ell > workers) throw std::invalid_argument("order statistic index must lie in 1..L");
  // E[T_(l)] = (1/rate) * sum_{j=L-l+1}^{L} 1/j for i.i.d. exponentials.
  auto harmonic_tail = [&] {
    double sum = 0.0;
    for (int j = workers - ell + 1; j <= workers; ++j) sum += 1.0 / j;
    return sum;
  };
  return std::visit(overloaded{
                        [&](const ExponentialLatency& m) { return harmonic_tail() / m.rate; },
                        [](const DeterministicLatency& m) { return m.value; },
                        [&](const ShiftedExponentialLatency& m) { return m.shift + harmonic_tail() / m.rate; },
                    },
                    model);
}

WaitOutcome simulate_wait(const LatencyModel& model, int workers, int ell, SeededRng& rng) {
  if (ell < 1 || ell > workers) throw std::invalid_argument("responder count must lie in 1..L");
  RoundOutcome round = sample_round(model, workers, rng);
  WaitOutcome out;
  out.elapsed = round.elapsed(ell);
  out.responders.assign(round.arrival_order.begin(), round.arrival_order.begin() + ell);
  return out;
}

}  // namespace seqcode
