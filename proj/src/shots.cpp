#include "ctsum/shots.hpp"

#include <algorithm>
#include <string>

#include "ctsum/error.hpp"

namespace ctsum {

ShotSegmentation::ShotSegmentation(std::vector<Shot> shots, std::size_t frames)
    : shots_(std::move(shots)), frames_(frames) {
  std::size_t expected = 0;
  for (std::size_t i = 0; i < shots_.size(); ++i) {
    const Shot& s = shots_[i];
    if (s.start != expected || s.end <= s.start) {
      throw ShapeError("shot " + std::to_string(i) + " [" + std::to_string(s.start) + ", " +
                       std::to_string(s.end) + ") breaks the tiling of [0, " +
                       std::to_string(frames) + ")");
    }
    expected = s.end;
  }
  if (expected != frames_ || (frames_ > 0 && shots_.empty())) {
    throw ShapeError("shots cover [0, " + std::to_string(expected) + ") but the video has " +
                     std::to_string(frames_) + " frames");
  }
}

ShotSegmentation default_shots(std::size_t frames, std::size_t shot_len) {
  if (shot_len == 0) throw ShapeError("shot length must be at least 1");
  std::vector<Shot> shots;
  for (std::size_t start = 0; start < frames; start += shot_len) {
    shots.push_back({start, std::min(frames, start + shot_len)});
  }
  return ShotSegmentation(std::move(shots), frames);
}

}  // namespace ctsum
