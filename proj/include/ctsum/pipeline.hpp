#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctsum/evaluate.hpp"
#include "ctsum/metrics.hpp"
#include "ctsum/refine.hpp"

namespace ctsum {

enum class Metric { kAlign, kUniform, kFilter };

/// Parses a comma list such as "align,uniform,filter".
std::vector<Metric> parse_metrics(std::string_view list);
std::string metrics_to_string(const std::vector<Metric>& metrics);

struct TrainedModel {
  ProjectorParams projector;
  FilterParams filter;
};

struct ScoringOptions {
  std::vector<Metric> metrics = {Metric::kAlign, Metric::kUniform};
  double neighbor_ratio = kDefaultNeighborRatio;
  double epsilon = kDefaultEpsilon;
  double sigma = kDefaultSmoothingSigma;
  bool scale_filter = true;
  /// Score a length-normalized copy and map back to the original frames.
  bool normalize_length = false;
  std::size_t length_target = kDefaultLengthTarget;
  std::uint64_t seed = 0;
};

/// Frame importance: each selected metric scaled to [0, 1], multiplied, plus
/// epsilon, then Gaussian-smoothed. Without a model the metrics run on the
/// input features; with one, alignment and uniformity run on projected
/// features (neighbours still from the input) and the filter becomes
/// available. The filter metric without a model is a DomainError.
ScoreSeries importance_scores(const FeatureMatrix& features, const ScoringOptions& options,
                              const TrainedModel* model = nullptr);

/// Metrics straight from pretrained features; fit() is a no-op.
class TrainingFreeScorer : public Scorer {
 public:
  explicit TrainingFreeScorer(ScoringOptions options) : options_(std::move(options)) {}
  void fit(std::span<const VideoRecord* const>) override {}
  ScoreSeries score(const VideoRecord& video) const override;

 private:
  ScoringOptions options_;
};

/// Trains a projector and filter on each fold's training videos.
class RefinedScorer : public Scorer {
 public:
  RefinedScorer(TrainConfig config, ScoringOptions options)
      : config_(config), options_(std::move(options)) {}
  void fit(std::span<const VideoRecord* const> train) override;
  ScoreSeries score(const VideoRecord& video) const override;
  const std::optional<TrainResult>& last_training() const { return trained_; }

 private:
  TrainConfig config_;
  ScoringOptions options_;
  std::optional<TrainResult> trained_;
};

/// Returns stored predictions by video id; fit() is a no-op.
class FixedScorer : public Scorer {
 public:
  explicit FixedScorer(std::vector<std::pair<std::string, ScoreSeries>> scores)
      : scores_(std::move(scores)) {}
  void fit(std::span<const VideoRecord* const>) override {}
  ScoreSeries score(const VideoRecord& video) const override;

 private:
  std::vector<std::pair<std::string, ScoreSeries>> scores_;
};

}  // namespace ctsum
