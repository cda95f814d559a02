#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ctsum/feature_matrix.hpp"
#include "ctsum/matrix.hpp"

namespace ctsum {

enum class ScoreKind { kRawLoss, kScaled, kImportance };

/// Per-frame scalar series (losses, scaled metrics or final importance).
struct ScoreSeries {
  std::vector<double> values;
  ScoreKind kind = ScoreKind::kRawLoss;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Per-frame semantic neighbours: `k()` indices per frame, anchor excluded.
class NeighborSets {
 public:
  NeighborSets() = default;
  /// `indices` holds frames * k entries. Throws ShapeError when an index is
  /// out of range or equals its anchor.
  NeighborSets(std::size_t frames, std::size_t k, std::vector<std::uint32_t> indices);

  std::size_t frames() const { return frames_; }
  std::size_t k() const { return k_; }
  std::span<const std::uint32_t> of(std::size_t t) const {
    return {indices_.data() + t * k_, k_};
  }

  friend bool operator==(const NeighborSets&, const NeighborSets&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t k_ = 0;
  std::vector<std::uint32_t> indices_;
};

/// K = max(1, round(ratio * T)), capped at T - 1 since the anchor is excluded.
std::size_t neighbor_count(std::size_t frames, double ratio);

/// Top-K frames by dot product (cosine on unit rows) for every frame, anchor
/// excluded, ties broken by lower frame index. Requires a normalized matrix,
/// 0 < ratio <= 1 and T >= 2 (TooShortError otherwise).
NeighborSets cosine_neighbors(const FeatureMatrix& m, double ratio);

/// Mean squared distance from each frame to its neighbours.
ScoreSeries local_dissimilarity(const FeatureMatrix& m, const NeighborSets& n);

/// log of the mean Gaussian potential exp(-2 |x_t - x|^2) over all other
/// frames. Requires T >= 2.
ScoreSeries global_consistency(const FeatureMatrix& m);

/// Min-max scaling to [0, 1]; a constant series maps to 0.5 everywhere.
ScoreSeries minmax_scale(const ScoreSeries& s);

/// Elementwise product of the scaled parts plus epsilon.
ScoreSeries combine_scores(std::span<const ScoreSeries> parts, double epsilon);

/// Discrete Gaussian smoothing, radius ceil(3 sigma), normalized kernel,
/// half-sample symmetric padding. sigma == 0 is the identity.
ScoreSeries gaussian_smooth(const ScoreSeries& s, double sigma);

inline constexpr double kDefaultNeighborRatio = 0.1;
inline constexpr double kDefaultEpsilon = 0.05;
inline constexpr double kDefaultSmoothingSigma = 2.0;

/// Numerically stable log(sum(exp(args))). Empty input gives -inf.
double log_sum_exp(std::span<const double> args);

// Kernels shared with the refinement module. Squared distances use the
// identity |a - b|^2 = |a|^2 + |b|^2 - 2<a, b>.
namespace kernels {

Matrix squared_distances(const Matrix& a, const Matrix& b);
std::vector<double> local_alignment(const Matrix& sq_dist, const NeighborSets& n);
/// log((1/(T-1)) sum_{j != t} exp(-2 d_tj)) from a square distance matrix.
std::vector<double> log_mean_potential_self(const Matrix& sq_dist);
/// log((1/A) sum_j exp(-2 d_tj)) over every column j of a T x A matrix.
std::vector<double> log_mean_potential(const Matrix& sq_dist);

}  // namespace kernels

}  // namespace ctsum
