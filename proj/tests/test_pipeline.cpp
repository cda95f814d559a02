#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "ctsum/error.hpp"
#include "ctsum/pipeline.hpp"
#include "ctsum/synth.hpp"
#include "oracles.hpp"

using namespace ctsum;

TEST_CASE("metric lists") {
  CHECK(parse_metrics("align") == std::vector<Metric>{Metric::kAlign});
  CHECK(parse_metrics("align,uniform,filter").size() == 3);
  CHECK(metrics_to_string(parse_metrics("uniform,align")) == "uniform,align");
  CHECK_THROWS_AS(parse_metrics("align,bogus"), InputError);
  CHECK_THROWS_AS(parse_metrics(""), InputError);
}

TEST_CASE("importance is the product of scaled metrics") {
  std::mt19937_64 rng(1);
  const FeatureMatrix x = oracle::random_unit_rows(50, 8, rng);
  ScoringOptions o;
  o.epsilon = 0.0;
  o.sigma = 0.0;
  const auto p = importance_scores(x, o);

  const auto local = oracle::local_dissimilarity(x, oracle::neighbors(x, 0.1));
  const auto global = oracle::global_consistency(x);
  const auto la = minmax_scale(ScoreSeries{local, ScoreKind::kRawLoss});
  const auto lu = minmax_scale(ScoreSeries{global, ScoreKind::kRawLoss});
  for (std::size_t t = 0; t < x.frames(); ++t) {
    CHECK(p[t] == doctest::Approx(la[t] * lu[t]).epsilon(1e-9));
  }

  o.epsilon = 0.05;
  o.sigma = 2.0;
  const auto smoothed = importance_scores(x, o);
  std::vector<double> shifted(x.frames());
  for (std::size_t t = 0; t < x.frames(); ++t) shifted[t] = p[t] + 0.05;
  const auto want = gaussian_smooth(ScoreSeries{shifted, ScoreKind::kImportance}, 2.0);
  for (std::size_t t = 0; t < x.frames(); ++t) CHECK(smoothed[t] == doctest::Approx(want[t]));
}

TEST_CASE("align-only scores rank planted duplicates lowest") {
  SynthSpec spec;
  spec.n_videos = 2;
  ScoringOptions o;
  o.metrics = {Metric::kAlign};
  o.sigma = 0.0;
  for (const auto& v : generate(spec).videos) {
    const auto s = importance_scores(v.features, o);
    CHECK(planted_auc(s, v.labels, FrameLabel::kKey, FrameLabel::kRedundant) > 0.9);
    CHECK(planted_auc(s, v.labels, FrameLabel::kBackground, FrameLabel::kRedundant) > 0.9);
  }
}

TEST_CASE("filter metric needs a model") {
  std::mt19937_64 rng(2);
  const FeatureMatrix x = oracle::random_unit_rows(20, 6, rng);
  ScoringOptions o;
  o.metrics = {Metric::kFilter};
  CHECK_THROWS_AS(importance_scores(x, o), DomainError);

  const TrainedModel model{ProjectorParams::init(6, 4, 8, 1), FilterParams::init(4, 5, 2)};
  const auto s = importance_scores(x, o, &model);
  CHECK(s.size() == 20);
  o.metrics = {Metric::kAlign, Metric::kUniform, Metric::kFilter};
  o.scale_filter = false;
  CHECK(importance_scores(x, o, &model).size() == 20);
}

TEST_CASE("length-normalized scoring maps back to every frame") {
  std::mt19937_64 rng(3);
  const FeatureMatrix x = oracle::random_unit_rows(90, 5, rng);
  ScoringOptions o;
  o.normalize_length = true;
  o.length_target = 40;
  const auto s = importance_scores(x, o);
  CHECK(s.size() == 90);
  // each score comes from a frame of the resampled video
  const auto resampled = importance_scores(x.select_rows(length_normalization_indices(90, 40, 0)),
                                           ScoringOptions{});
  for (double v : s.values) {
    CHECK(std::find(resampled.values.begin(), resampled.values.end(), v) != resampled.values.end());
  }
  o.length_target = 90;
  ScoringOptions plain;
  CHECK(importance_scores(x, o).values == importance_scores(x, plain).values);
}

TEST_CASE("refined scorer trains before scoring") {
  SynthSpec spec;
  spec.n_videos = 3;
  spec.frames = 60;
  spec.redundancy = 8;
  const Dataset d = to_dataset(generate(spec));
  TrainConfig c;
  c.epochs = 2;
  c.proj_dim = 8;
  c.hidden_dim = 16;
  c.filter_hidden_dim = 8;
  ScoringOptions o;
  o.metrics = {Metric::kAlign, Metric::kUniform, Metric::kFilter};
  RefinedScorer scorer(c, o);
  CHECK_THROWS_AS(scorer.score(d.videos[0]), DomainError);
  std::vector<const VideoRecord*> train = {&d.videos[0], &d.videos[1]};
  scorer.fit(train);
  REQUIRE(scorer.last_training().has_value());
  CHECK(scorer.last_training()->history.epoch_loss.size() == 2);
  CHECK(scorer.score(d.videos[2]).size() == 60);
}
