#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctsum/dataset.hpp"
#include "ctsum/metrics.hpp"

namespace ctsum {

/// Planted-structure dataset description.
///
/// Every video owns `n_clusters` orthonormal theme directions. Each theme
/// carries `redundancy` near-duplicate frames (tangent noise with per-axis
/// standard deviation `noise_sigma`) and a share of the key frames, which sit
/// at tangent distance `key_spread` from the theme. Background frames spread
/// by `background_spread` around vectors of a pool shared by all videos.
/// Themes are orthogonal to the pool, so D >= n_clusters + pool size.
struct SynthSpec {
  std::size_t n_videos = 8;
  std::size_t n_train_only = 0;  // extra videos flagged train-only in the manifest
  std::size_t frames = 200;
  std::size_t dim = 32;
  std::size_t n_clusters = 4;
  std::size_t redundancy = 30;
  double noise_sigma = 0.05;
  double key_fraction = 0.2;
  double key_spread = 0.6;
  double background_spread = 0.6;
  std::size_t background_pool_size = 4;
  std::size_t block_length = 10;  // frames per shot
  std::size_t n_annotators = 3;
  double annotator_noise = 0.1;
  std::uint64_t seed = 0;

  /// Throws SpecError.
  void validate() const;
};

enum class FrameLabel { kRedundant, kKey, kBackground };
std::string_view to_string(FrameLabel l);

struct SynthVideo {
  std::string id;
  FeatureMatrix features;
  std::vector<FrameLabel> labels;
  ShotSegmentation shots;
  ReferenceSet references;  // per-shot annotator scores derived from labels
  VideoGroup group = VideoGroup::kEval;
};

struct SynthDataset {
  SynthSpec spec;
  std::vector<SynthVideo> videos;
  std::vector<std::vector<std::string>> splits;
};

SynthDataset generate(const SynthSpec& spec);

/// In-memory dataset equivalent of the files written by write_synth.
Dataset to_dataset(const SynthDataset& synth);

/// Writes features/<id>.vfeat, refs/<id>.json, labels.json and manifest.json
/// under `dir` and returns the manifest path.
std::filesystem::path write_synth(const SynthDataset& synth, const std::filesystem::path& dir);

/// Area under the ROC curve for ranking `positive` frames above `negative`
/// ones, ties counted 1/2. DegenerateLabelsError when either class is empty.
double planted_auc(const ScoreSeries& scores, std::span<const FrameLabel> labels,
                   FrameLabel positive, FrameLabel negative);
/// Key frames against every other frame.
double planted_auc(const ScoreSeries& scores, std::span<const FrameLabel> labels);

}  // namespace ctsum
