#pragma once

#include <cstddef>
#include <vector>

namespace ctsum {

struct Shot {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  std::size_t length() const { return end - start; }
  friend bool operator==(const Shot&, const Shot&) = default;
};

/// Sorted, disjoint half-open frame intervals whose union is [0, T).
class ShotSegmentation {
 public:
  ShotSegmentation() = default;
  /// Throws ShapeError unless the intervals tile [0, frames) in order with no
  /// empty shot.
  ShotSegmentation(std::vector<Shot> shots, std::size_t frames);

  const std::vector<Shot>& shots() const { return shots_; }
  std::size_t size() const { return shots_.size(); }
  std::size_t frames() const { return frames_; }
  const Shot& operator[](std::size_t i) const { return shots_[i]; }

  friend bool operator==(const ShotSegmentation&, const ShotSegmentation&) = default;

 private:
  std::vector<Shot> shots_;
  std::size_t frames_ = 0;
};

/// Consecutive shots of `shot_len` frames; the last one is shorter when
/// `frames` is not a multiple of `shot_len`.
ShotSegmentation default_shots(std::size_t frames, std::size_t shot_len);

inline constexpr std::size_t kDefaultShotLength = 30;

}  // namespace ctsum
