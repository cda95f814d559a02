#include "ctsum/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ctsum/error.hpp"
#include "ctsum/evaluate.hpp"
#include "ctsum/matrix.hpp"
#include "ctsum/seed.hpp"
#include "ctsum/vfeat.hpp"

namespace ctsum {

namespace {

using Vec = std::vector<double>;

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

void scale(Vec& v, double s) {
  for (double& x : v) x *= s;
}

// Random unit vector orthogonal to every vector in `basis` (itself orthonormal).
Vec random_orthogonal(std::size_t dim, const std::vector<Vec>& basis, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Vec v(dim);
    for (double& x : v) x = gauss(rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& b : basis) {
        const double p = dot(v, b);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= p * b[i];
      }
    }
    const double n = norm(v);
    if (n > 1e-6) {
      scale(v, 1.0 / n);
      return v;
    }
  }
}

// Gaussian vector with the component along `anchor` removed.
Vec tangent_noise(const Vec& anchor, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec g(anchor.size());
  for (double& x : g) x = gauss(rng);
  const double p = dot(g, anchor);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= p * anchor[i];
  return g;
}

Vec unit(Vec v) {
  scale(v, 1.0 / norm(v));
  return v;
}

Vec near_duplicate(const Vec& anchor, double sigma, std::mt19937_64& rng) {
  if (sigma == 0.0) return anchor;
  Vec g = tangent_noise(anchor, rng);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = anchor[i] + sigma * g[i];
  return unit(std::move(g));
}

Vec spread_around(const Vec& anchor, double spread, std::mt19937_64& rng) {
  if (spread == 0.0) return anchor;
  Vec g = unit(tangent_noise(anchor, rng));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = anchor[i] + spread * g[i];
  return unit(std::move(g));
}

double label_importance(FrameLabel l) {
  switch (l) {
    case FrameLabel::kKey: return 1.0;
    case FrameLabel::kRedundant: return 0.2;
    case FrameLabel::kBackground: return 0.1;
  }
  return 0.0;
}

struct Group {
  FrameLabel label;
  std::vector<Vec> frames;
};

SynthVideo make_video(const SynthSpec& spec, const std::vector<Vec>& pool, std::string id,
                      VideoGroup group, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> themes;
  std::vector<Vec> basis = pool;
  for (std::size_t c = 0; c < spec.n_clusters; ++c) {
    themes.push_back(random_orthogonal(spec.dim, basis, rng));
    basis.push_back(themes.back());
  }

  const std::size_t redundant = spec.n_clusters * spec.redundancy;
  const auto key_target = static_cast<std::size_t>(
      std::llround(spec.key_fraction * static_cast<double>(spec.frames)));
  const std::size_t key = pool.empty() ? spec.frames - redundant : key_target;
  const std::size_t background = pool.empty() ? 0 : spec.frames - redundant - key;

  std::vector<Group> groups;
  for (std::size_t c = 0; c < spec.n_clusters; ++c) {
    Group g{FrameLabel::kRedundant, {}};
    for (std::size_t i = 0; i < spec.redundancy; ++i) {
      g.frames.push_back(near_duplicate(themes[c], spec.noise_sigma, rng));
    }
    groups.push_back(std::move(g));
  }
  for (std::size_t c = 0; c < spec.n_clusters; ++c) {
    Group g{FrameLabel::kKey, {}};
    for (std::size_t i = c; i < key; i += spec.n_clusters) {
      g.frames.push_back(spread_around(themes[c], spec.key_spread, rng));
    }
    groups.push_back(std::move(g));
  }
  for (std::size_t p = 0; p < pool.size(); ++p) {
    Group g{FrameLabel::kBackground, {}};
    for (std::size_t i = p; i < background; i += pool.size()) {
      g.frames.push_back(spread_around(pool[p], spec.background_spread, rng));
    }
    groups.push_back(std::move(g));
  }

  // chunk every group into shots, then shuffle the shot order
  struct Chunk {
    FrameLabel label;
    const Vec* first;
    std::size_t count;
  };
  std::vector<Chunk> chunks;
  for (const Group& g : groups) {
    for (std::size_t s = 0; s < g.frames.size(); s += spec.block_length) {
      chunks.push_back({g.label, &g.frames[s], std::min(spec.block_length, g.frames.size() - s)});
    }
  }
  std::shuffle(chunks.begin(), chunks.end(), rng);

  SynthVideo v;
  v.id = std::move(id);
  v.group = group;
  std::vector<float> data;
  data.reserve(spec.frames * spec.dim);
  std::vector<Shot> shots;
  for (const Chunk& ch : chunks) {
    shots.push_back({v.labels.size(), v.labels.size() + ch.count});
    for (std::size_t i = 0; i < ch.count; ++i) {
      for (double x : ch.first[i]) data.push_back(static_cast<float>(x));
      v.labels.push_back(ch.label);
    }
  }
  v.features = FeatureMatrix(spec.frames, spec.dim, std::move(data), true);
  v.shots = ShotSegmentation(std::move(shots), spec.frames);

  std::normal_distribution<double> noise(0.0, spec.annotator_noise);
  for (std::size_t a = 0; a < spec.n_annotators; ++a) {
    std::vector<double> scores(spec.frames);
    for (std::size_t s = 0; s < v.shots.size(); ++s) {
      const Shot& shot = v.shots[s];
      const double base = label_importance(v.labels[shot.start]);
      const double value = std::clamp(base + noise(rng), 0.0, 1.0);
      for (std::size_t t = shot.start; t < shot.end; ++t) scores[t] = value;
    }
    v.references.scores.push_back(std::move(scores));
  }
  return v;
}

std::string video_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu", prefix, i);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_videos == 0) throw SpecError("need at least one video");
  if (frames == 0 || dim == 0) throw SpecError("frames and dim must be positive");
  if (n_clusters == 0) throw SpecError("need at least one cluster");
  if (n_clusters + background_pool_size > dim) {
    throw SpecError("dimension " + std::to_string(dim) + " cannot hold " +
                    std::to_string(n_clusters) + " orthogonal themes plus " +
                    std::to_string(background_pool_size) + " background vectors");
  }
  if (!(key_fraction > 0.0 && key_fraction < 1.0)) throw SpecError("key_fraction must be in (0, 1)");
  if (noise_sigma < 0.0 || key_spread < 0.0 || background_spread < 0.0 || annotator_noise < 0.0) {
    throw SpecError("noise and spread parameters must be non-negative");
  }
  if (block_length == 0) throw SpecError("block_length must be positive");
  const std::size_t redundant = n_clusters * redundancy;
  const auto key = static_cast<std::size_t>(std::llround(key_fraction * static_cast<double>(frames)));
  if (redundant + (background_pool_size > 0 ? key : 0) > frames) {
    throw SpecError("redundant and key frames exceed the video length");
  }
  if (background_pool_size == 0 && redundant >= frames) {
    throw SpecError("no room left for key frames");
  }
  if (key == 0) throw SpecError("key_fraction leaves no key frame");
}

std::string_view to_string(FrameLabel l) {
  switch (l) {
    case FrameLabel::kRedundant: return "redundant";
    case FrameLabel::kKey: return "key";
    case FrameLabel::kBackground: return "background";
  }
  return "?";
}

SynthDataset generate(const SynthSpec& spec) {
  spec.validate();
  SynthDataset out;
  out.spec = spec;

  std::mt19937_64 pool_rng(derive_seed(spec.seed, 0));
  std::vector<Vec> pool;
  for (std::size_t p = 0; p < spec.background_pool_size; ++p) {
    pool.push_back(random_orthogonal(spec.dim, pool, pool_rng));
  }

  for (std::size_t k = 0; k < spec.n_videos; ++k) {
    out.videos.push_back(make_video(spec, pool, video_id("synth", k), VideoGroup::kEval,
                                    derive_seed(spec.seed, 100 + k)));
  }
  for (std::size_t k = 0; k < spec.n_train_only; ++k) {
    out.videos.push_back(make_video(spec, pool, video_id("aux", k), VideoGroup::kTrainOnly,
                                    derive_seed(spec.seed, 100 + spec.n_videos + k)));
  }

  std::vector<std::string> ids;
  for (std::size_t k = 0; k < spec.n_videos; ++k) ids.push_back(out.videos[k].id);
  std::mt19937_64 split_rng(derive_seed(spec.seed, 1));
  std::shuffle(ids.begin(), ids.end(), split_rng);
  const std::size_t n_folds = std::min<std::size_t>(5, ids.size());
  out.splits.assign(n_folds, {});
  for (std::size_t i = 0; i < ids.size(); ++i) out.splits[i % n_folds].push_back(ids[i]);
  return out;
}

Dataset to_dataset(const SynthDataset& synth) {
  Dataset d;
  d.splits = synth.splits;
  d.setting = Setting::kCanonical;
  d.aggregation = F1Aggregation::kMean;
  for (const auto& v : synth.videos) {
    d.videos.push_back(VideoRecord{v.id, v.features, v.shots, v.references, v.group});
  }
  return d;
}

std::filesystem::path write_synth(const SynthDataset& synth, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "features");
  fs::create_directories(dir / "refs");
  DatasetManifest m;
  m.splits = synth.splits;
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& v : synth.videos) {
    const fs::path feat = fs::path("features") / (v.id + ".vfeat");
    const fs::path refs = fs::path("refs") / (v.id + ".json");
    save_features(dir / feat, v.features);
    save_references(dir / refs, v.references);
    m.videos.push_back(VideoEntry{v.id, feat, v.shots.shots(), refs, v.group});
    nlohmann::json l = nlohmann::json::array();
    for (FrameLabel f : v.labels) l.push_back(to_string(f));
    labels[v.id] = std::move(l);
  }
  {
    std::ofstream out(dir / "labels.json", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "labels.json").string());
    out << labels.dump() << '\n';
  }
  const fs::path manifest = dir / "manifest.json";
  write_manifest(manifest, m);
  return manifest;
}

double planted_auc(const ScoreSeries& scores, std::span<const FrameLabel> labels,
                   FrameLabel positive, FrameLabel negative) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  std::vector<double> values;
  std::vector<bool> is_pos;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] == positive || labels[t] == negative) {
      values.push_back(scores.values[t]);
      is_pos.push_back(labels[t] == positive);
    }
  }
  const auto n_pos = static_cast<double>(std::count(is_pos.begin(), is_pos.end(), true));
  const auto n_neg = static_cast<double>(values.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw DegenerateLabelsError("AUC needs both classes present");
  // Mann-Whitney U from average ranks
  const auto ranks = average_ranks(values);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (is_pos[i]) rank_sum += ranks[i];
  }
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double planted_auc(const ScoreSeries& scores, std::span<const FrameLabel> labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  std::vector<FrameLabel> binary(labels.begin(), labels.end());
  for (auto& l : binary) {
    if (l != FrameLabel::kKey) l = FrameLabel::kRedundant;
  }
  return planted_auc(scores, binary, FrameLabel::kKey, FrameLabel::kRedundant);
}

}  // namespace ctsum
