#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ctsum {

/// T x D row-major matrix of per-frame features.
///
/// Entries are always finite. When `normalized()` is true every row has unit
/// Euclidean norm (within 1e-5).
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  /// Throws FormatError for an empty shape or a size mismatch, DataError for
  /// non-finite entries, DataError when `normalized` is claimed but a row is
  /// not unit-norm.
  FeatureMatrix(std::size_t frames, std::size_t dim, std::vector<float> data,
                bool normalized = false);

  std::size_t frames() const { return frames_; }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }
  bool empty() const { return frames_ == 0; }

  std::span<const float> row(std::size_t t) const {
    return {data_.data() + t * dim_, dim_};
  }
  std::span<const float> data() const { return data_; }
  float at(std::size_t t, std::size_t j) const { return data_[t * dim_ + j]; }

  /// Row selection in the given order; the normalized flag carries over.
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  bool normalized_ = false;
};

inline constexpr double kUnitNormTolerance = 1e-5;

/// Scales every row to unit norm. Throws DegenerateFeatureError on a zero row.
FeatureMatrix l2_normalize_rows(const FeatureMatrix& m);

/// Source row indices used by normalize_length. Longer inputs are randomly
/// sub-sampled (sorted, seeded); shorter ones use nearest-neighbour
/// interpolation round(i * (T - 1) / (target - 1)).
std::vector<std::size_t> length_normalization_indices(std::size_t frames,
                                                      std::size_t target,
                                                      std::uint64_t seed);

/// Resamples a video to exactly `target` frames.
FeatureMatrix normalize_length(const FeatureMatrix& m, std::size_t target,
                               std::uint64_t seed);

inline constexpr std::size_t kDefaultLengthTarget = 200;

}  // namespace ctsum
