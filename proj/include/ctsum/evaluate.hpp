#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ctsum/dataset.hpp"
#include "ctsum/metrics.hpp"
#include "ctsum/summarize.hpp"

namespace ctsum {

/// A coefficient plus a flag raised when the inputs left it undefined (the
/// value is then 0).
struct MetricValue {
  double value = 0.0;
  bool degenerate = false;
};

/// F1 of a predicted frame mask against one reference mask, with
/// P = |A n B| / |A| and R = |A n B| / |B| for reference A and prediction B.
MetricValue f1_single(std::span<const int> pred, std::span<const int> ref);

/// F1 against every reference summary, aggregated by mean or max.
/// MissingReferenceError when `refs` holds no summary.
double f1_multi(std::span<const int> pred, const ReferenceSet& refs, F1Aggregation agg);

/// Kendall tau-b, (C - D) / sqrt((C + D + T_a)(C + D + T_b)).
MetricValue kendall_tau(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of average-tie ranks.
MetricValue spearman_rho(std::span<const double> a, std::span<const double> b);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> v);

struct Correlations {
  double tau = 0.0;
  double rho = 0.0;
};

/// Per-video mean over annotators, then mean over videos.
/// MissingReferenceError when a video has no annotator scores.
Correlations correlations_protocol(std::span<const ScoreSeries> predictions,
                                   std::span<const ReferenceSet> references);

/// Produces frame importance for a video; trainable scorers fit on a fold's
/// training videos first.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual void fit(std::span<const VideoRecord* const> train) = 0;
  virtual ScoreSeries score(const VideoRecord& video) const = 0;
};

struct EvalOptions {
  double ratio = kDefaultSummaryRatio;
  std::size_t default_shot_length = kDefaultShotLength;
  std::size_t workers = 1;
};

struct VideoEval {
  std::string id;
  std::size_t fold = 0;
  double f1 = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  bool has_f1 = false;
  bool has_correlation = false;
};

/// Averages are means of the per-video entries that carry the metric.
struct EvalResult {
  double f1 = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  std::vector<VideoEval> per_video;
};

struct SettingResult {
  Setting setting = Setting::kCanonical;
  std::vector<EvalResult> folds;
  double f1 = 0.0;
  double tau = 0.0;
  double rho = 0.0;
};

/// Scores and evaluates one video: knapsack summary against the reference
/// summaries (generated from annotator scores when none are given) and rank
/// correlations against annotator scores.
VideoEval evaluate_video(const VideoRecord& video, const ScoreSeries& prediction,
                         F1Aggregation agg, const EvalOptions& options);

/// Reference summaries for score-annotated videos: one knapsack summary per
/// annotator, with the same shots and budget as predictions.
std::vector<std::vector<int>> summaries_from_scores(const ReferenceSet& refs,
                                                    const ShotSegmentation& shots, double ratio);

EvalResult evaluate_videos(std::span<const VideoRecord* const> videos, const Scorer& scorer,
                           F1Aggregation agg, const EvalOptions& options, std::size_t fold = 0);

/// Canonical: k-fold over the eval videos. Augmented: each fold's training set
/// also holds the train-only videos. Transfer: train on train-only videos,
/// test once on every eval video.
SettingResult run_setting(const Dataset& data, Setting setting, Scorer& scorer,
                          const EvalOptions& options = {});

/// (train, test) video lists of every fold. ManifestError on malformed splits.
struct Fold {
  std::vector<const VideoRecord*> train;
  std::vector<const VideoRecord*> test;
};
std::vector<Fold> make_folds(const Dataset& data, Setting setting);

}  // namespace ctsum
