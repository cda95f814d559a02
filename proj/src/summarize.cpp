#include "ctsum/summarize.hpp"

#include <cmath>
#include <string>

#include "ctsum/error.hpp"

namespace ctsum {

std::vector<std::size_t> SummarySelection::selected_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i]) out.push_back(i);
  }
  return out;
}

std::vector<double> shot_scores(const ScoreSeries& s, const ShotSegmentation& shots) {
  if (s.size() != shots.frames()) {
    throw ShapeError("score series has " + std::to_string(s.size()) + " frames, shots cover " +
                     std::to_string(shots.frames()));
  }
  std::vector<double> out;
  out.reserve(shots.size());
  for (const Shot& shot : shots.shots()) {
    if (shot.length() == 0) throw ShapeError("empty shot");
    double acc = 0.0;
    for (std::size_t t = shot.start; t < shot.end; ++t) acc += s.values[t];
    out.push_back(acc / static_cast<double>(shot.length()));
  }
  return out;
}

SummarySelection knapsack_select(std::span<const double> values,
                                 std::span<const std::size_t> lengths, std::size_t budget) {
  if (values.size() != lengths.size()) throw ShapeError("values and lengths differ in size");
  const std::size_t n = values.size();
  for (std::size_t len : lengths) {
    if (len == 0) throw ShapeError("knapsack item with zero length");
  }
  const std::size_t width = budget + 1;
  // best[i][w]: optimum over the first i items with capacity w
  std::vector<double> best((n + 1) * width, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double v = values[i - 1];
    const std::size_t len = lengths[i - 1];
    const double* prev = &best[(i - 1) * width];
    double* cur = &best[i * width];
    for (std::size_t w = 0; w <= budget; ++w) {
      cur[w] = prev[w];
      if (len <= w && prev[w - len] + v > cur[w]) cur[w] = prev[w - len] + v;
    }
  }

  SummarySelection sel;
  sel.selected.assign(n, false);
  sel.budget = budget;
  sel.value = best[n * width + budget];
  std::size_t w = budget;
  for (std::size_t i = n; i >= 1; --i) {
    if (best[i * width + w] == best[(i - 1) * width + w]) continue;
    sel.selected[i - 1] = true;
    w -= lengths[i - 1];
  }
  return sel;
}

std::size_t summary_budget(std::size_t frames, double ratio) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(frames) + 1e-9));
}

SummarySelection make_summary(const ScoreSeries& s, const ShotSegmentation& shots, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw DomainError("summary ratio must be in (0, 1]");
  const std::vector<double> values = shot_scores(s, shots);
  std::vector<std::size_t> lengths;
  lengths.reserve(shots.size());
  for (const Shot& shot : shots.shots()) lengths.push_back(shot.length());

  SummarySelection sel = knapsack_select(values, lengths, summary_budget(s.size(), ratio));
  sel.frame_mask.assign(s.size(), 0);
  for (std::size_t i = 0; i < shots.size(); ++i) {
    if (!sel.selected[i]) continue;
    for (std::size_t t = shots[i].start; t < shots[i].end; ++t) sel.frame_mask[t] = 1;
  }
  return sel;
}

}  // namespace ctsum
