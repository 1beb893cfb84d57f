#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "seqcode/feasibility.hpp"

using namespace seqcode;

TEST_CASE("row_count_s small cases") {
  CHECK(row_count_s(2, 3, 4) == 7);
  CHECK(row_count_s(3, 3, 4) == 4);
  CHECK(row_count_s(1, 0, 4) == 0);
  CHECK(row_count_s(3, 6, 5) == 10);
  CHECK(row_count_s(4, 1, 4) == 1);
  CHECK(row_count_s(1, 5, 4) == 20);
  CHECK_THROWS_AS(row_count_s(0, 1, 4), std::invalid_argument);
  CHECK_THROWS_AS(row_count_s(5, 1, 4), std::invalid_argument);
  CHECK_THROWS_AS(row_count_s(1, -1, 4), std::invalid_argument);
}

TEST_CASE("row_count_s agrees with the independent brute force") {
  for (int L = 1; L <= 4; ++L) {
    for (int i = 1; i <= L; ++i) {
      for (int k = 0; k <= 7; ++k) {
        CAPTURE(L);
        CAPTURE(i);
        CAPTURE(k);
        CHECK(row_count_s(i, k, L) == oracle::brute_force_min_rows(L, i, k));
      }
    }
  }
}

TEST_CASE("min_rows_oracle matches brute force and returns a valid witness") {
  for (int L = 1; L <= 4; ++L) {
    for (int i = 1; i <= L; ++i) {
      for (int k = 0; k <= 6; ++k) {
        const auto inst = min_rows_oracle(L, i, k);
        CAPTURE(L);
        CAPTURE(i);
        CAPTURE(k);
        CHECK(inst.objective == oracle::brute_force_min_rows(L, i, k));
        std::int64_t total = 0;
        for (int a : inst.allocation) total += a;
        CHECK(total == inst.objective);
        auto sorted = inst.allocation;
        std::sort(sorted.begin(), sorted.end());
        std::int64_t weakest = 0;
        for (int j = 0; j < i; ++j) weakest += sorted[static_cast<std::size_t>(j)];
        CHECK(weakest >= k);
      }
    }
  }
  CHECK(min_rows_oracle(4, 2, 3).objective == 7);
  CHECK(min_rows_oracle(4, 4, 1).objective == 1);
  CHECK(min_rows_oracle(5, 3, 6).objective == 10);
  CHECK_THROWS_AS(min_rows_oracle(7, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(min_rows_oracle(4, 5, 1), std::invalid_argument);
}

TEST_CASE("check_feasible reports per-level budgets") {
  const auto b = check_feasible(Configuration{4, 3, {0, 3, 3, 1}});
  CHECK(b.per_level == std::vector<std::int64_t>{0, 7, 4, 1});
  CHECK(b.total == 12);
  CHECK(b.capacity == 12);
  CHECK(b.feasible);

  const auto mds = check_feasible(Configuration{4, 3, {0, 0, 9, 0}});
  CHECK(mds.per_level[2] == 12);
  CHECK(mds.feasible);

  const auto over = check_feasible(Configuration{4, 3, {4, 0, 0, 0}});
  CHECK(over.per_level[0] == 16);
  CHECK_FALSE(over.feasible);

  CHECK(check_feasible(Configuration{4, 10, {0, 0, 6, 32}}).total == 40);
  CHECK(check_feasible(Configuration{4, 10, {5, 10, 0, 0}}).total == 40);
}

TEST_CASE("configuration validation and prefix sums") {
  const Configuration c{4, 10, {5, 10, 0, 0}};
  CHECK(c.cumulative_rows(1) == 5);
  CHECK(c.cumulative_rows(2) == 15);
  CHECK(c.total_rows() == 15);
  CHECK(c.rows_at(2) == 10);
  CHECK_THROWS_AS((Configuration{4, 3, {1, 2}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((Configuration{0, 3, {}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((Configuration{2, 3, {1, -1}}).validate(), std::invalid_argument);
}

TEST_CASE("feasible_configs finds the example configurations") {
  const std::vector<RankTarget> ex1{{6, 3}, {38, 4}};
  const auto c1 = feasible_configs(4, 10, ex1, {38, 0});
  CHECK(std::find(c1.begin(), c1.end(), Configuration{4, 10, {0, 0, 6, 32}}) != c1.end());

  const std::vector<RankTarget> ex2{{5, 1}, {15, 2}};
  const auto c2 = feasible_configs(4, 10, ex2);
  CHECK(std::find(c2.begin(), c2.end(), Configuration{4, 10, {5, 10, 0, 0}}) != c2.end());

  const std::vector<RankTarget> none{{2, 1}};
  CHECK(feasible_configs(1, 1, none).empty());
}

TEST_CASE("feasible_configs results are feasible and meet every target") {
  const std::vector<RankTarget> targets{{3, 2}, {7, 4}};
  const auto all = feasible_configs(4, 4, targets);
  REQUIRE_FALSE(all.empty());
  for (const auto& c : all) {
    CHECK(check_feasible(c).feasible);
    CHECK(c.cumulative_rows(2) >= 3);
    CHECK(c.cumulative_rows(4) >= 7);
  }
  CHECK(std::is_sorted(all.begin(), all.end(),
                       [](const Configuration& a, const Configuration& b) { return a.level_rows < b.level_rows; }));

  // Exhaustive cross-check on a small grid.
  std::size_t expected = 0;
  for (int a = 0; a <= 16; ++a)
    for (int b = 0; b <= 16; ++b)
      for (int c = 0; c <= 16; ++c)
        for (int d = 0; d <= 16; ++d) {
          const Configuration cfg{4, 4, {a, b, c, d}};
          if (check_feasible(cfg).feasible && a + b >= 3 && a + b + c + d >= 7) ++expected;
        }
  CHECK(all.size() == expected);
}

TEST_CASE("select_configuration prefers the smallest row budget") {
  const std::vector<RankTarget> ex1{{6, 3}, {38, 4}};
  const auto pick = select_configuration(4, 10, ex1, {38, 0});
  REQUIRE(pick);
  CHECK(pick->total_rows() == 38);
  CHECK(check_feasible(*pick).feasible);
  CHECK(pick->cumulative_rows(3) >= 6);

  const std::vector<RankTarget> none{{2, 1}};
  CHECK_FALSE(select_configuration(1, 1, none));
}
