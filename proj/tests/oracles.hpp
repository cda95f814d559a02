#pragma once

// Naive reference implementations used by the unit and acceptance tests.
// They deliberately avoid the library's shortcuts: explicit differences
// instead of the Gram identity, exhaustive search instead of dynamic
// programming, pair loops instead of rank arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ctsum/feature_matrix.hpp"

namespace oracle {

inline ctsum::FeatureMatrix random_unit_rows(std::size_t frames, std::size_t dim,
                                             std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<float> data(frames * dim);
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<double> v(dim);
    double n2 = 0.0;
    for (double& x : v) {
      x = g(rng);
      n2 += x * x;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      data[t * dim + j] = static_cast<float>(v[j] / std::sqrt(n2));
    }
  }
  return ctsum::l2_normalize_rows(ctsum::FeatureMatrix(frames, dim, std::move(data)));
}

inline double sq_dist(const ctsum::FeatureMatrix& a, std::size_t i, const ctsum::FeatureMatrix& b,
                      std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const double d = static_cast<double>(a.at(i, k)) - static_cast<double>(b.at(j, k));
    s += d * d;
  }
  return s;
}

inline std::size_t neighbor_count(std::size_t frames, double ratio) {
  auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(frames) + 0.5));
  k = std::max<std::size_t>(k, 1);
  return std::min(k, frames - 1);
}

/// K most cosine-similar other frames, sorted by (similarity desc, index asc).
inline std::vector<std::vector<std::size_t>> neighbors(const ctsum::FeatureMatrix& m,
                                                       double ratio) {
  const std::size_t T = m.frames();
  const std::size_t K = neighbor_count(T, ratio);
  std::vector<std::vector<std::size_t>> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < T; ++j) {
      if (j == t) continue;
      double c = 0.0;
      for (std::size_t k = 0; k < m.dim(); ++k) {
        c += static_cast<double>(m.at(t, k)) * static_cast<double>(m.at(j, k));
      }
      cand.emplace_back(c, j);
    }
    std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    for (std::size_t k = 0; k < K; ++k) out[t].push_back(cand[k].second);
  }
  return out;
}

inline std::vector<double> local_dissimilarity(const ctsum::FeatureMatrix& m,
                                               const std::vector<std::vector<std::size_t>>& nb) {
  std::vector<double> out(m.frames());
  for (std::size_t t = 0; t < m.frames(); ++t) {
    double s = 0.0;
    for (std::size_t j : nb[t]) s += sq_dist(m, t, m, j);
    out[t] = s / static_cast<double>(nb[t].size());
  }
  return out;
}

inline std::vector<double> global_consistency(const ctsum::FeatureMatrix& m) {
  const std::size_t T = m.frames();
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < T; ++j) {
      if (j != t) s += std::exp(-2.0 * sq_dist(m, t, m, j));
    }
    out[t] = std::log(s / static_cast<double>(T - 1));
  }
  return out;
}

/// Unit-norm means of consecutive `len` frames, trailing remainder dropped.
inline std::vector<std::vector<double>> segments(const ctsum::FeatureMatrix& z, std::size_t len) {
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s + len <= z.frames(); s += len) {
    std::vector<double> mean(z.dim(), 0.0);
    for (std::size_t t = s; t < s + len; ++t) {
      for (std::size_t k = 0; k < z.dim(); ++k) mean[k] += z.at(t, k);
    }
    double n2 = 0.0;
    for (double x : mean) n2 += x * x;
    for (double& x : mean) x /= std::sqrt(n2);
    out.push_back(std::move(mean));
  }
  return out;
}

inline std::vector<double> uniqueness(const ctsum::FeatureMatrix& z,
                                      const std::vector<ctsum::FeatureMatrix>& others,
                                      std::size_t len) {
  std::vector<std::vector<double>> segs;
  for (const auto& o : others) {
    auto s = segments(o, len);
    segs.insert(segs.end(), s.begin(), s.end());
  }
  std::vector<double> out(z.frames());
  for (std::size_t t = 0; t < z.frames(); ++t) {
    double s = 0.0;
    for (const auto& seg : segs) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < z.dim(); ++k) {
        const double d = static_cast<double>(z.at(t, k)) - seg[k];
        d2 += d * d;
      }
      s += std::exp(-2.0 * d2);
    }
    out[t] = std::log(s / static_cast<double>(segs.size()));
  }
  return out;
}

struct KnapsackAnswer {
  double value = 0.0;
  std::uint32_t mask = 0;  // bit i = item i
};

/// Exhaustive 0/1 knapsack. Among optimal subsets the smallest mask wins,
/// which is the subset that leaves out higher-index items first.
inline KnapsackAnswer knapsack(const std::vector<double>& values,
                               const std::vector<std::size_t>& lengths, std::size_t budget) {
  const std::size_t n = values.size();
  KnapsackAnswer best{-1.0, 0};
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::size_t w = 0;
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        w += lengths[i];
        v += values[i];
      }
    }
    if (w > budget) continue;
    if (v > best.value) best = {v, mask};
  }
  return best;
}

inline std::uint64_t inversions(std::vector<double> v) {
  std::uint64_t inv = 0;
  std::vector<double> tmp(v.size());
  std::function<void(std::size_t, std::size_t)> sort = [&](std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return;
    const std::size_t mid = (lo + hi) / 2;
    sort(lo, mid);
    sort(mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
      if (v[j] < v[i]) {
        inv += mid - i;
        tmp[k++] = v[j++];
      } else {
        tmp[k++] = v[i++];
      }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
              tmp.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
  };
  sort(0, v.size());
  return inv;
}

/// Tie-free Kendall tau: order b by a, count inversions.
inline double kendall_by_inversions(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return a[x] < a[y]; });
  std::vector<double> ordered;
  for (std::size_t i : idx) ordered.push_back(b[i]);
  const double n = static_cast<double>(a.size());
  return 1.0 - 2.0 * static_cast<double>(inversions(ordered)) / (n * (n - 1.0) / 2.0);
}

/// Tau-b from tie-group sizes: (nc - nd) / sqrt((n0 - n1)(n0 - n2)).
inline double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double nc = 0.0, nd = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      if (s > 0) nc += 1;
      if (s < 0) nd += 1;
    }
  }
  auto tie_pairs = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size();) {
      std::size_t j = i;
      while (j < v.size() && v[j] == v[i]) ++j;
      const double t = static_cast<double>(j - i);
      total += t * (t - 1.0) / 2.0;
      i = j;
    }
    return total;
  };
  const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return (nc - nd) / std::sqrt((n0 - tie_pairs(a)) * (n0 - tie_pairs(b)));
}

/// rank = 1 + #smaller + (#equal - 1) / 2, computed by counting.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double x : v) {
      if (x < v[i]) less += 1;
      if (x == v[i]) equal += 1;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

/// Pairwise AUC, ties counted one half.
inline double auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Central difference over a float parameter evaluated in double. The
/// effective step is the exact gap between the two representable values.
inline double central_difference(float& param, double h, const std::function<double()>& f) {
  const float saved = param;
  const float plus = static_cast<float>(static_cast<double>(saved) + h);
  const float minus = static_cast<float>(static_cast<double>(saved) - h);
  param = plus;
  const double fp = f();
  param = minus;
  const double fm = f();
  param = saved;
  return (fp - fm) / (static_cast<double>(plus) - static_cast<double>(minus));
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace oracle
