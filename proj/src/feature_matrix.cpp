#include "ctsum/feature_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ctsum/error.hpp"

namespace ctsum {

namespace {

double row_norm(std::span<const float> row) {
  double sq = 0.0;
  for (float v : row) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t frames, std::size_t dim,
                             std::vector<float> data, bool normalized)
    : frames_(frames), dim_(dim), data_(std::move(data)), normalized_(normalized) {
  if (frames_ == 0 || dim_ == 0) {
    throw FormatError("feature matrix must have at least one frame and one dimension");
  }
  if (data_.size() != frames_ * dim_) {
    throw FormatError("feature payload has " + std::to_string(data_.size()) +
                      " entries, expected " + std::to_string(frames_ * dim_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DataError("non-finite feature value at frame " + std::to_string(i / dim_));
    }
  }
  if (normalized_) {
    for (std::size_t t = 0; t < frames_; ++t) {
      if (std::abs(row_norm(row(t)) - 1.0) > kUnitNormTolerance) {
        throw DataError("frame " + std::to_string(t) +
                        " is flagged normalized but does not have unit norm");
      }
    }
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  std::vector<float> out;
  out.reserve(indices.size() * dim_);
  for (std::size_t idx : indices) {
    auto r = row(idx);
    out.insert(out.end(), r.begin(), r.end());
  }
  return FeatureMatrix(indices.size(), dim_, std::move(out), normalized_);
}

FeatureMatrix l2_normalize_rows(const FeatureMatrix& m) {
  std::vector<float> out(m.data().begin(), m.data().end());
  for (std::size_t t = 0; t < m.frames(); ++t) {
    const double norm = row_norm(m.row(t));
    if (norm == 0.0) {
      throw DegenerateFeatureError("frame " + std::to_string(t) + " has zero norm");
    }
    for (std::size_t j = 0; j < m.dim(); ++j) {
      float& v = out[t * m.dim() + j];
      v = static_cast<float>(static_cast<double>(v) / norm);
    }
  }
  return FeatureMatrix(m.frames(), m.dim(), std::move(out), true);
}

std::vector<std::size_t> length_normalization_indices(std::size_t frames,
                                                      std::size_t target,
                                                      std::uint64_t seed) {
  if (target == 0) throw ShapeError("length target must be at least 1");
  std::vector<std::size_t> idx;
  idx.reserve(target);
  if (frames == target) {
    idx.resize(target);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else if (frames > target) {
    std::vector<std::size_t> all(frames);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // selection sampling keeps the relative order of the input
    std::sample(all.begin(), all.end(), std::back_inserter(idx), target, rng);
  } else if (target == 1) {
    idx.push_back(0);
  } else {
    const double step = static_cast<double>(frames - 1) / static_cast<double>(target - 1);
    for (std::size_t i = 0; i < target; ++i) {
      idx.push_back(static_cast<std::size_t>(std::lround(static_cast<double>(i) * step)));
    }
  }
  return idx;
}

FeatureMatrix normalize_length(const FeatureMatrix& m, std::size_t target,
                               std::uint64_t seed) {
  if (m.frames() == target) return m;
  const auto idx = length_normalization_indices(m.frames(), target, seed);
  return m.select_rows(idx);
}

}  // namespace ctsum
