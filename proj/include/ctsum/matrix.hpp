#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctsum/feature_matrix.hpp"

namespace ctsum {

/// Dense row-major double matrix used for intermediate computations.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Matrix from(const FeatureMatrix& m) {
    Matrix out(m.frames(), m.dim());
    auto src = m.data();
    for (std::size_t i = 0; i < src.size(); ++i) out.data[i] = src[i];
    return out;
  }

  /// Rounds to float storage. Throws like the FeatureMatrix constructor.
  FeatureMatrix to_features(bool normalized) const {
    std::vector<float> out(data.begin(), data.end());
    return FeatureMatrix(rows, cols, std::move(out), normalized);
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace ctsum
