#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ctsum/error.hpp"
#include "ctsum/summarize.hpp"
#include "oracles.hpp"

using namespace ctsum;

namespace {

std::uint32_t mask_of(const SummarySelection& s) {
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < s.selected.size(); ++i) {
    if (s.selected[i]) m |= 1u << i;
  }
  return m;
}

void check_against_exhaustive(const std::vector<double>& values,
                              const std::vector<std::size_t>& lengths, std::size_t budget) {
  const auto got = knapsack_select(values, lengths, budget);
  const auto want = oracle::knapsack(values, lengths, budget);
  CHECK(got.value == want.value);
  CHECK(mask_of(got) == want.mask);
  std::size_t used = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (got.selected[i]) used += lengths[i];
  }
  CHECK(used <= budget);
}

}  // namespace

TEST_CASE("knapsack matches exhaustive search") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> values(n);
    std::vector<std::size_t> lengths(n);
    const bool integer = rep % 2 == 0;  // integer values produce ties
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = integer ? static_cast<double>(rng() % 5)
                          : std::uniform_real_distribution<double>(0, 1)(rng);
      lengths[i] = 1 + rng() % 8;
    }
    check_against_exhaustive(values, lengths, rng() % 40);
  }
}

TEST_CASE("knapsack tie rule prefers lower shot indices") {
  // {0} and {1} both reach value 1 with the same length
  const auto s = knapsack_select(std::vector<double>{1, 1}, std::vector<std::size_t>{3, 3}, 3);
  CHECK(s.selected == std::vector<bool>{true, false});
  // zero-valued items are left out
  const auto z = knapsack_select(std::vector<double>{0, 2}, std::vector<std::size_t>{1, 1}, 5);
  CHECK(z.selected == std::vector<bool>{false, true});
  CHECK(knapsack_select(std::vector<double>{5}, std::vector<std::size_t>{4}, 3).value == 0.0);
  CHECK_THROWS_AS(knapsack_select(std::vector<double>{1}, std::vector<std::size_t>{0}, 3), ShapeError);
}

TEST_CASE("summary budget") {
  CHECK(summary_budget(200, 0.15) == 30);
  CHECK(summary_budget(100, 0.15) == 15);
  CHECK(summary_budget(100, 0.29) == 29);  // 0.29 * 100 evaluates just below 29
  CHECK(summary_budget(7, 0.15) == 1);
  CHECK(summary_budget(6, 0.15) == 0);
  CHECK(summary_budget(10, 1.0) == 10);
}

TEST_CASE("shot scores are per-shot means") {
  const ShotSegmentation shots({{0, 2}, {2, 5}}, 5);
  const auto s = shot_scores(ScoreSeries{{1, 3, 0, 0, 3}, ScoreKind::kImportance}, shots);
  CHECK(s == std::vector<double>{2.0, 1.0});
  CHECK_THROWS_AS(shot_scores(ScoreSeries{{1, 2}, ScoreKind::kImportance}, shots), ShapeError);
}

TEST_CASE("make_summary") {
  const ShotSegmentation shots({{0, 4}, {4, 6}, {6, 10}, {10, 20}}, 20);
  std::vector<double> v(20, 0.1);
  v[4] = v[5] = 0.9;
  v[6] = v[7] = v[8] = v[9] = 0.5;
  const auto s = make_summary(ScoreSeries{v, ScoreKind::kImportance}, shots, 0.3);  // budget 6
  CHECK(s.budget == 6);
  CHECK(s.selected_indices() == std::vector<std::size_t>{1, 2});
  std::vector<int> mask(20, 0);
  for (int t = 4; t < 10; ++t) mask[static_cast<std::size_t>(t)] = 1;
  CHECK(s.frame_mask == mask);
  CHECK_THROWS_AS(make_summary(ScoreSeries{v, ScoreKind::kImportance}, shots, 0.0), DomainError);
  CHECK_THROWS_AS(make_summary(ScoreSeries{v, ScoreKind::kImportance}, shots, 1.5), DomainError);
}

TEST_CASE("summary length never exceeds the budget") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t T = 20 + rng() % 300;
    std::vector<double> v(T);
    for (double& x : v) x = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto shots = default_shots(T, 1 + rng() % 40);
    const auto s = make_summary(ScoreSeries{v, ScoreKind::kImportance}, shots, 0.15);
    std::size_t on = 0;
    for (int x : s.frame_mask) on += static_cast<std::size_t>(x);
    CHECK(on <= summary_budget(T, 0.15));
    CHECK(s.frame_mask.size() == T);
  }
}
