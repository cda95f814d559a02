#include "ctsum/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ctsum/error.hpp"
#include "ctsum/parallel.hpp"

namespace ctsum {

namespace {

void check_mask(std::span<const int> m) {
  for (int v : m) {
    if (v != 0 && v != 1) throw DomainError("frame masks must be 0/1");
  }
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

MetricValue f1_single(std::span<const int> pred, std::span<const int> ref) {
  if (pred.size() != ref.size()) throw ShapeError("prediction and reference masks differ in length");
  check_mask(pred);
  check_mask(ref);
  std::size_t a = 0, b = 0, both = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    a += static_cast<std::size_t>(ref[t]);
    b += static_cast<std::size_t>(pred[t]);
    both += static_cast<std::size_t>(ref[t] & pred[t]);
  }
  if (a == 0 || b == 0) return {0.0, true};
  if (both == 0) return {0.0, false};
  const double precision = static_cast<double>(both) / static_cast<double>(a);
  const double recall = static_cast<double>(both) / static_cast<double>(b);
  return {2.0 * precision * recall / (precision + recall), false};
}

double f1_multi(std::span<const int> pred, const ReferenceSet& refs, F1Aggregation agg) {
  if (refs.summaries.empty()) throw MissingReferenceError("no reference summaries for F1");
  std::vector<double> scores;
  for (const auto& r : refs.summaries) scores.push_back(f1_single(pred, r).value);
  if (agg == F1Aggregation::kMax) return *std::max_element(scores.begin(), scores.end());
  return mean(scores);
}

MetricValue kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("rank correlation inputs differ in length");
  if (a.size() < 2) throw ShapeError("rank correlation needs at least two items");
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const int sa = sign(a[i] - a[j]);
      const int sb = sign(b[i] - b[j]);
      if (sa == 0 && sb == 0) continue;
      if (sa == 0) {
        ++ties_a;
      } else if (sb == 0) {
        ++ties_b;
      } else if (sa == sb) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double cd = static_cast<double>(concordant + discordant);
  const double denom =
      std::sqrt((cd + static_cast<double>(ties_a)) * (cd + static_cast<double>(ties_b)));
  if (denom == 0.0) return {0.0, true};
  return {static_cast<double>(concordant - discordant) / denom, false};
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

MetricValue spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("rank correlation inputs differ in length");
  if (a.size() < 2) throw ShapeError("rank correlation needs at least two items");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double ma = mean(ra), mb = mean(rb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return {0.0, true};
  return {sab / std::sqrt(saa * sbb), false};
}

Correlations correlations_protocol(std::span<const ScoreSeries> predictions,
                                   std::span<const ReferenceSet> references) {
  if (predictions.size() != references.size()) {
    throw ShapeError("one reference set is needed per prediction");
  }
  if (predictions.empty()) throw MissingReferenceError("no videos to correlate");
  std::vector<double> taus, rhos;
  for (std::size_t v = 0; v < predictions.size(); ++v) {
    const auto& refs = references[v];
    if (refs.scores.empty()) {
      throw MissingReferenceError("video " + std::to_string(v) + " has no annotator scores");
    }
    std::vector<double> vt, vr;
    for (const auto& annot : refs.scores) {
      vt.push_back(kendall_tau(predictions[v].values, annot).value);
      vr.push_back(spearman_rho(predictions[v].values, annot).value);
    }
    taus.push_back(mean(vt));
    rhos.push_back(mean(vr));
  }
  return {mean(taus), mean(rhos)};
}

std::vector<std::vector<int>> summaries_from_scores(const ReferenceSet& refs,
                                                    const ShotSegmentation& shots, double ratio) {
  std::vector<std::vector<int>> out;
  for (const auto& s : refs.scores) {
    out.push_back(make_summary(ScoreSeries{s, ScoreKind::kImportance}, shots, ratio).frame_mask);
  }
  return out;
}

VideoEval evaluate_video(const VideoRecord& video, const ScoreSeries& prediction,
                         F1Aggregation agg, const EvalOptions& options) {
  const std::size_t frames = video.features.frames();
  if (prediction.size() != frames) {
    throw ShapeError("prediction for '" + video.id + "' has " + std::to_string(prediction.size()) +
                     " frames, video has " + std::to_string(frames));
  }
  if (!video.references || video.references->empty()) {
    throw MissingReferenceError("video '" + video.id + "' has no references");
  }
  const ReferenceSet& refs = *video.references;
  const ShotSegmentation shots =
      video.shots ? *video.shots : default_shots(frames, options.default_shot_length);

  VideoEval out;
  out.id = video.id;
  const SummarySelection pred = make_summary(prediction, shots, options.ratio);
  ReferenceSet summary_refs;
  summary_refs.summaries =
      refs.summaries.empty() ? summaries_from_scores(refs, shots, options.ratio) : refs.summaries;
  out.f1 = f1_multi(pred.frame_mask, summary_refs, agg);
  out.has_f1 = true;

  if (!refs.scores.empty()) {
    const Correlations c = correlations_protocol(std::span(&prediction, 1), std::span(&refs, 1));
    out.tau = c.tau;
    out.rho = c.rho;
    out.has_correlation = true;
  }
  return out;
}

EvalResult evaluate_videos(std::span<const VideoRecord* const> videos, const Scorer& scorer,
                           F1Aggregation agg, const EvalOptions& options, std::size_t fold) {
  EvalResult res;
  res.per_video.resize(videos.size());
  parallel_for(videos.size(), options.workers, [&](std::size_t i) {
    res.per_video[i] = evaluate_video(*videos[i], scorer.score(*videos[i]), agg, options);
    res.per_video[i].fold = fold;
  });
  std::vector<double> f1s, taus, rhos;
  for (const auto& v : res.per_video) {
    if (v.has_f1) f1s.push_back(v.f1);
    if (v.has_correlation) {
      taus.push_back(v.tau);
      rhos.push_back(v.rho);
    }
  }
  res.f1 = mean(f1s);
  res.tau = mean(taus);
  res.rho = mean(rhos);
  return res;
}

std::vector<Fold> make_folds(const Dataset& data, Setting setting) {
  std::vector<const VideoRecord*> eval, aux;
  for (const auto& v : data.videos) {
    (v.group == VideoGroup::kEval ? eval : aux).push_back(&v);
  }
  if (setting == Setting::kTransfer) {
    if (eval.empty()) throw ManifestError("transfer setting has no eval videos");
    return {Fold{aux, eval}};
  }
  if (data.splits.empty()) throw ManifestError("setting needs cross-validation splits");
  std::vector<Fold> folds;
  for (std::size_t f = 0; f < data.splits.size(); ++f) {
    std::set<std::string> test_ids;
    Fold fold;
    for (const auto& id : data.splits[f]) {
      const VideoRecord& v = data.find(id);
      if (v.group != VideoGroup::kEval) {
        throw ManifestError("fold " + std::to_string(f) + " tests train-only video '" + id + "'");
      }
      if (!test_ids.insert(id).second) {
        throw ManifestError("fold " + std::to_string(f) + " lists '" + id + "' twice");
      }
      fold.test.push_back(&v);
    }
    if (fold.test.empty()) throw ManifestError("fold " + std::to_string(f) + " has no test videos");
    for (const VideoRecord* v : eval) {
      if (!test_ids.count(v->id)) fold.train.push_back(v);
    }
    if (setting == Setting::kAugmented) fold.train.insert(fold.train.end(), aux.begin(), aux.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

SettingResult run_setting(const Dataset& data, Setting setting, Scorer& scorer,
                          const EvalOptions& options) {
  SettingResult res;
  res.setting = setting;
  const auto folds = make_folds(data, setting);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    scorer.fit(folds[f].train);
    res.folds.push_back(evaluate_videos(folds[f].test, scorer, data.aggregation, options, f));
  }
  std::vector<double> f1s, taus, rhos;
  for (const auto& r : res.folds) {
    f1s.push_back(r.f1);
    taus.push_back(r.tau);
    rhos.push_back(r.rho);
  }
  res.f1 = mean(f1s);
  res.tau = mean(taus);
  res.rho = mean(rhos);
  return res;
}

}  // namespace ctsum
