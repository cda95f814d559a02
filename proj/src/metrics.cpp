#include "ctsum/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ctsum/error.hpp"

namespace ctsum {

NeighborSets::NeighborSets(std::size_t frames, std::size_t k, std::vector<std::uint32_t> indices)
    : frames_(frames), k_(k), indices_(std::move(indices)) {
  if (indices_.size() != frames_ * k_) throw ShapeError("neighbor index table has wrong size");
  for (std::size_t t = 0; t < frames_; ++t) {
    for (std::uint32_t j : of(t)) {
      if (j >= frames_ || j == t) {
        throw ShapeError("invalid neighbor " + std::to_string(j) + " for frame " +
                         std::to_string(t));
      }
    }
  }
}

std::size_t neighbor_count(std::size_t frames, double ratio) {
  const auto k = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(ratio * static_cast<double>(frames))));
  return std::min(k, frames - 1);
}

NeighborSets cosine_neighbors(const FeatureMatrix& m, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw DomainError("neighbor ratio must be in (0, 1]");
  if (m.frames() < 2) throw TooShortError("neighbor retrieval needs at least 2 frames");
  const std::size_t frames = m.frames();
  const std::size_t k = neighbor_count(frames, ratio);
  const Matrix x = Matrix::from(m);

  std::vector<std::uint32_t> out;
  out.reserve(frames * k);
  std::vector<std::uint32_t> order(frames - 1);
  std::vector<double> sim(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < frames; ++j) sim[j] = dot(x.row(t), x.row(j));
    std::size_t pos = 0;
    for (std::size_t j = 0; j < frames; ++j) {
      if (j != t) order[pos++] = static_cast<std::uint32_t>(j);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        return sim[a] != sim[b] ? sim[a] > sim[b] : a < b;
                      });
    out.insert(out.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return NeighborSets(frames, k, std::move(out));
}

double log_sum_exp(std::span<const double> args) {
  if (args.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(args.begin(), args.end());
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double a : args) sum += std::exp(a - hi);
  return hi + std::log(sum);
}

namespace kernels {

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw ShapeError("distance operands have different dimensions");
  std::vector<double> na(a.rows), nb(b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) na[i] = dot(a.row(i), a.row(i));
  for (std::size_t j = 0; j < b.rows; ++j) nb[j] = dot(b.row(j), b.row(j));
  Matrix d(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      d(i, j) = std::max(0.0, na[i] + nb[j] - 2.0 * dot(a.row(i), b.row(j)));
    }
  }
  return d;
}

std::vector<double> local_alignment(const Matrix& sq_dist, const NeighborSets& n) {
  if (n.frames() != sq_dist.rows) throw ShapeError("neighbor sets do not match frame count");
  std::vector<double> out(sq_dist.rows);
  for (std::size_t t = 0; t < sq_dist.rows; ++t) {
    double acc = 0.0;
    for (std::uint32_t j : n.of(t)) acc += sq_dist(t, j);
    out[t] = acc / static_cast<double>(n.k());
  }
  return out;
}

std::vector<double> log_mean_potential_self(const Matrix& sq_dist) {
  const std::size_t frames = sq_dist.rows;
  if (frames < 2) throw TooShortError("global consistency needs at least 2 frames");
  std::vector<double> out(frames);
  std::vector<double> args;
  args.reserve(frames - 1);
  const double log_count = std::log(static_cast<double>(frames - 1));
  for (std::size_t t = 0; t < frames; ++t) {
    args.clear();
    for (std::size_t j = 0; j < frames; ++j) {
      if (j != t) args.push_back(-2.0 * sq_dist(t, j));
    }
    out[t] = log_sum_exp(args) - log_count;
  }
  return out;
}

std::vector<double> log_mean_potential(const Matrix& sq_dist) {
  if (sq_dist.cols == 0) throw EmptyBatchError("no reference vectors for the potential");
  std::vector<double> out(sq_dist.rows);
  std::vector<double> args(sq_dist.cols);
  const double log_count = std::log(static_cast<double>(sq_dist.cols));
  for (std::size_t t = 0; t < sq_dist.rows; ++t) {
    for (std::size_t j = 0; j < sq_dist.cols; ++j) args[j] = -2.0 * sq_dist(t, j);
    out[t] = log_sum_exp(args) - log_count;
  }
  return out;
}

}  // namespace kernels

ScoreSeries local_dissimilarity(const FeatureMatrix& m, const NeighborSets& n) {
  const Matrix x = Matrix::from(m);
  return {kernels::local_alignment(kernels::squared_distances(x, x), n), ScoreKind::kRawLoss};
}

ScoreSeries global_consistency(const FeatureMatrix& m) {
  if (m.frames() < 2) throw TooShortError("global consistency needs at least 2 frames");
  const Matrix x = Matrix::from(m);
  return {kernels::log_mean_potential_self(kernels::squared_distances(x, x)),
          ScoreKind::kRawLoss};
}

ScoreSeries minmax_scale(const ScoreSeries& s) {
  ScoreSeries out{s.values, ScoreKind::kScaled};
  if (s.values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  for (double& v : out.values) v = range > 0.0 ? (v - lo) / range : 0.5;
  return out;
}

ScoreSeries combine_scores(std::span<const ScoreSeries> parts, double epsilon) {
  if (parts.empty()) throw ShapeError("combine_scores needs at least one part");
  if (epsilon < 0.0) throw DomainError("epsilon must be non-negative");
  const std::size_t n = parts.front().size();
  for (const auto& p : parts) {
    if (p.size() != n) throw ShapeError("score parts have different lengths");
  }
  ScoreSeries out{std::vector<double>(n, 1.0), ScoreKind::kImportance};
  for (const auto& p : parts) {
    for (std::size_t t = 0; t < n; ++t) out.values[t] *= p.values[t];
  }
  for (double& v : out.values) v += epsilon;
  return out;
}

ScoreSeries gaussian_smooth(const ScoreSeries& s, double sigma) {
  if (sigma < 0.0) throw DomainError("smoothing sigma must be non-negative");
  if (sigma == 0.0 || s.values.empty()) return s;
  const auto radius = static_cast<long long>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (long long k = -radius; k <= radius; ++k) {
    kernel[static_cast<std::size_t>(k + radius)] =
        std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& w : kernel) w /= total;

  const auto n = static_cast<long long>(s.size());
  auto reflect = [n](long long i) {
    // mirror about -0.5 and n - 0.5, period 2n
    long long r = i % (2 * n);
    if (r < 0) r += 2 * n;
    return r < n ? r : 2 * n - 1 - r;
  };
  ScoreSeries out{std::vector<double>(s.size(), 0.0), s.kind};
  for (long long t = 0; t < n; ++t) {
    double acc = 0.0;
    for (long long k = -radius; k <= radius; ++k) {
      acc += kernel[static_cast<std::size_t>(k + radius)] *
             s.values[static_cast<std::size_t>(reflect(t + k))];
    }
    out.values[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

}  // namespace ctsum
