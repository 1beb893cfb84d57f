#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "seqcode/cluster.hpp"

using namespace seqcode;

TEST_CASE("latency model validation") {
  CHECK_NOTHROW(validate(ExponentialLatency{1.0}));
  CHECK_THROWS_AS(validate(ExponentialLatency{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(DeterministicLatency{-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ShiftedExponentialLatency{-0.1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ShiftedExponentialLatency{0.5, 0.0}), std::invalid_argument);
}

TEST_CASE("uniform draws lie in (0, 1] and depend only on (seed, round, worker)") {
  const SeededRng a(42);
  const SeededRng b(42);
  const SeededRng c(43);
  for (std::uint64_t r = 0; r < 1000; ++r) {
    for (int w = 0; w < 4; ++w) {
      const double u = a.uniform(r, w);
      CHECK(u > 0.0);
      CHECK(u <= 1.0);
      CHECK(u == b.uniform(r, w));
    }
  }
  CHECK(a.uniform(0, 0) != c.uniform(0, 0));
  CHECK(a.derive(1) != a.derive(2));
}

TEST_CASE("deterministic rounds") {
  SeededRng rng(1);
  const auto round = sample_round(DeterministicLatency{1.0}, 4, rng);
  for (double t : round.finish_times) CHECK(t == 1.0);
  for (int ell = 1; ell <= 4; ++ell) CHECK(round.elapsed(ell) == 1.0);
  CHECK(round.arrival_order == std::vector<int>{1, 2, 3, 4});
  CHECK_THROWS_AS(round.elapsed(0), std::out_of_range);
  CHECK_THROWS_AS(round.elapsed(5), std::out_of_range);
}

TEST_CASE("exponential rounds are reproducible and ordered") {
  SeededRng a(7);
  SeededRng b(7);
  for (int i = 0; i < 50; ++i) {
    const auto ra = sample_round(ExponentialLatency{1.0}, 4, a);
    const auto rb = sample_round(ExponentialLatency{1.0}, 4, b);
    CHECK(ra.finish_times == rb.finish_times);
    auto sorted = ra.finish_times;
    std::sort(sorted.begin(), sorted.end());
    for (int ell = 1; ell <= 4; ++ell) CHECK(ra.elapsed(ell) == sorted[static_cast<std::size_t>(ell - 1)]);
    auto perm = ra.arrival_order;
    std::sort(perm.begin(), perm.end());
    CHECK(perm == std::vector<int>{1, 2, 3, 4});
  }
  CHECK(a.rounds_used() == 50);
}

TEST_CASE("simulate_wait picks the earliest responders") {
  const LatencyModel model = ExponentialLatency{1.0};
  SeededRng probe(99);
  const auto round = sample_round(model, 4, probe);
  const auto slowest = static_cast<int>(std::max_element(round.finish_times.begin(), round.finish_times.end()) -
                                        round.finish_times.begin()) + 1;

  SeededRng r3(99);
  const auto w3 = simulate_wait(model, 4, 3, r3);
  CHECK(w3.responders.size() == 3);
  CHECK(std::find(w3.responders.begin(), w3.responders.end(), slowest) == w3.responders.end());
  CHECK(w3.elapsed == round.elapsed(3));

  SeededRng r4(99);
  const auto w4 = simulate_wait(model, 4, 4, r4);
  CHECK(w4.elapsed == *std::max_element(round.finish_times.begin(), round.finish_times.end()));
  CHECK(w4.responders.size() == 4);

  SeededRng r1(99);
  CHECK(simulate_wait(model, 4, 1, r1).elapsed == *std::min_element(round.finish_times.begin(), round.finish_times.end()));

  SeededRng bad(1);
  CHECK_THROWS_AS(simulate_wait(model, 4, 0, bad), std::invalid_argument);
  CHECK_THROWS_AS(simulate_wait(model, 4, 5, bad), std::invalid_argument);
}

TEST_CASE("order_stat_mean matches numerical integration") {
  for (int L = 1; L <= 6; ++L) {
    for (int ell = 1; ell <= L; ++ell) {
      for (double rate : {0.5, 1.0, 3.0}) {
        CHECK(order_stat_mean(ExponentialLatency{rate}, L, ell) ==
              doctest::Approx(oracle::exponential_order_stat_mean(L, ell, rate)).epsilon(1e-9));
      }
    }
  }
  CHECK(order_stat_mean(ExponentialLatency{1.0}, 4, 1) == doctest::Approx(0.25));
  CHECK(order_stat_mean(ExponentialLatency{1.0}, 4, 2) == doctest::Approx(7.0 / 12.0));
  CHECK(order_stat_mean(ExponentialLatency{1.0}, 4, 3) == doctest::Approx(13.0 / 12.0));
  CHECK(order_stat_mean(ExponentialLatency{1.0}, 4, 4) == doctest::Approx(25.0 / 12.0));
  CHECK(order_stat_mean(DeterministicLatency{2.5}, 4, 3) == 2.5);
  CHECK(order_stat_mean(ShiftedExponentialLatency{1.0, 1.0}, 4, 4) == doctest::Approx(1.0 + 25.0 / 12.0));
}

TEST_CASE("Monte Carlo third order statistic is within 2 percent") {
  SeededRng rng(2718);
  const int rounds = 100000;
  double sum = 0.0;
  for (int i = 0; i < rounds; ++i) sum += sample_round(ExponentialLatency{1.0}, 4, rng).elapsed(3);
  CHECK(std::abs(sum / rounds - 13.0 / 12.0) <= 0.02 * 13.0 / 12.0);
}
