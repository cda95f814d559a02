#include "ctsum/pipeline.hpp"

#include <cmath>
#include <cstdlib>

#include "ctsum/error.hpp"

namespace ctsum {

std::vector<Metric> parse_metrics(std::string_view list) {
  std::vector<Metric> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const std::string_view name = list.substr(0, comma);
    if (name == "align") {
      out.push_back(Metric::kAlign);
    } else if (name == "uniform") {
      out.push_back(Metric::kUniform);
    } else if (name == "filter") {
      out.push_back(Metric::kFilter);
    } else {
      throw InputError("unknown metric '" + std::string(name) + "'");
    }
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw InputError("at least one metric is required");
  return out;
}

std::string metrics_to_string(const std::vector<Metric>& metrics) {
  std::string out;
  for (Metric m : metrics) {
    if (!out.empty()) out += ',';
    out += m == Metric::kAlign ? "align" : m == Metric::kUniform ? "uniform" : "filter";
  }
  return out;
}

namespace {

ScoreSeries score_direct(const FeatureMatrix& x, const ScoringOptions& o, const TrainedModel* model) {
  const FeatureMatrix xn = x.normalized() ? x : l2_normalize_rows(x);
  const NeighborSets nb = cosine_neighbors(xn, o.neighbor_ratio);

  std::optional<FeatureMatrix> z;
  if (model) z = project(model->projector, xn);
  const FeatureMatrix& feats = z ? *z : xn;

  std::optional<std::pair<ScoreSeries, ScoreSeries>> losses;
  auto raw_losses = [&]() -> const std::pair<ScoreSeries, ScoreSeries>& {
    if (!losses) losses = refined_losses(feats, nb);
    return *losses;
  };

  std::vector<ScoreSeries> parts;
  for (Metric m : o.metrics) {
    switch (m) {
      case Metric::kAlign: parts.push_back(minmax_scale(raw_losses().first)); break;
      case Metric::kUniform: parts.push_back(minmax_scale(raw_losses().second)); break;
      case Metric::kFilter: {
        if (!model) throw DomainError("the filter metric needs a trained checkpoint");
        ScoreSeries h = filter_scores(model->filter, feats);
        parts.push_back(o.scale_filter ? minmax_scale(h) : ScoreSeries{h.values, ScoreKind::kScaled});
        break;
      }
    }
  }
  return gaussian_smooth(combine_scores(parts, o.epsilon), o.sigma);
}

}  // namespace

ScoreSeries importance_scores(const FeatureMatrix& features, const ScoringOptions& options,
                              const TrainedModel* model) {
  if (!options.normalize_length || features.frames() == options.length_target) {
    return score_direct(features, options, model);
  }
  const auto idx = length_normalization_indices(features.frames(), options.length_target, options.seed);
  const ScoreSeries resampled = score_direct(features.select_rows(idx), options, model);
  // each original frame takes the score of the resampled frame with the
  // nearest source index (first on ties)
  ScoreSeries out{std::vector<double>(features.frames()), resampled.kind};
  std::size_t pos = 0;
  for (std::size_t t = 0; t < features.frames(); ++t) {
    while (pos + 1 < idx.size() &&
           std::llabs(static_cast<long long>(idx[pos + 1]) - static_cast<long long>(t)) <
               std::llabs(static_cast<long long>(idx[pos]) - static_cast<long long>(t))) {
      ++pos;
    }
    out.values[t] = resampled.values[pos];
  }
  return out;
}

ScoreSeries TrainingFreeScorer::score(const VideoRecord& video) const {
  return importance_scores(video.features, options_);
}

void RefinedScorer::fit(std::span<const VideoRecord* const> train) {
  std::vector<FeatureMatrix> feats;
  feats.reserve(train.size());
  for (const VideoRecord* v : train) feats.push_back(v->features);
  trained_ = ctsum::train(feats, config_);
}

ScoreSeries RefinedScorer::score(const VideoRecord& video) const {
  if (!trained_) throw DomainError("RefinedScorer used before fit()");
  const TrainedModel model{trained_->projector, trained_->filter};
  return importance_scores(video.features, options_, &model);
}

ScoreSeries FixedScorer::score(const VideoRecord& video) const {
  for (const auto& [id, s] : scores_) {
    if (id == video.id) return s;
  }
  throw MissingReferenceError("no stored scores for video '" + video.id + "'");
}

}  // namespace ctsum
