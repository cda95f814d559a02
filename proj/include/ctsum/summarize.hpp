#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctsum/metrics.hpp"
#include "ctsum/shots.hpp"

namespace ctsum {

struct SummarySelection {
  std::vector<bool> selected;   // per shot
  std::vector<int> frame_mask;  // 0/1 per frame
  std::size_t budget = 0;
  double value = 0.0;           // total value of the selected shots

  std::vector<std::size_t> selected_indices() const;
};

/// Mean frame score of every shot.
std::vector<double> shot_scores(const ScoreSeries& s, const ShotSegmentation& shots);

/// Exact 0/1 knapsack by dynamic programming over integer capacities. Among
/// optimal selections the backtrace leaves out a shot whenever that keeps the
/// optimum, so lower shot indices win ties. `frame_mask` stays empty.
SummarySelection knapsack_select(std::span<const double> values,
                                 std::span<const std::size_t> lengths, std::size_t budget);

/// Budget floor(ratio * T); shot scores fed to the knapsack; frame mask marks
/// the frames of the selected shots.
SummarySelection make_summary(const ScoreSeries& s, const ShotSegmentation& shots, double ratio);

/// floor(ratio * frames) with a small tolerance against representation error.
std::size_t summary_budget(std::size_t frames, double ratio);

inline constexpr double kDefaultSummaryRatio = 0.15;

}  // namespace ctsum
