#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ctsum/dataset.hpp"
#include "ctsum/feature_matrix.hpp"
#include "ctsum/matrix.hpp"
#include "ctsum/metrics.hpp"

namespace ctsum {

/// Affine map y = W x + b with W stored out x in, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<float> weight;
  std::vector<float> bias;

  static DenseLayer zeros(std::size_t in, std::size_t out);
  /// Weights uniform in +-sqrt(6 / (in + out)), zero bias.
  static DenseLayer xavier(std::size_t in, std::size_t out, std::mt19937_64& rng);

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Refinement projector: u = W0 x + b0, z = normalize(u + W2 tanh(W1 u + b1) + b2).
struct ProjectorParams {
  DenseLayer input;   // D -> d
  DenseLayer hidden;  // d -> h
  DenseLayer output;  // h -> d

  std::size_t input_dim() const { return input.in; }
  std::size_t proj_dim() const { return input.out; }
  std::size_t hidden_dim() const { return hidden.out; }

  static ProjectorParams init(std::size_t input_dim, std::size_t proj_dim, std::size_t hidden_dim,
                              std::uint64_t seed);
  /// Identity on the first min(D, d) coordinates, residual branch silenced.
  static ProjectorParams identity(std::size_t input_dim, std::size_t proj_dim,
                                  std::size_t hidden_dim);

  friend bool operator==(const ProjectorParams&, const ProjectorParams&) = default;
};

/// Uniqueness filter: r = sigmoid(w2 . tanh(W1 z + b1) + b2).
struct FilterParams {
  DenseLayer hidden;  // d -> h_f
  DenseLayer output;  // h_f -> 1

  std::size_t input_dim() const { return hidden.in; }
  std::size_t hidden_dim() const { return hidden.out; }

  static FilterParams init(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

struct TrainConfig {
  double lambda1 = 0.5;
  double lambda2 = 0.1;
  double lambda3 = 0.1;
  double neighbor_ratio = kDefaultNeighborRatio;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  std::size_t batch_size = 8;
  std::size_t epochs = 40;
  std::size_t segment_length = 5;
  std::size_t proj_dim = 128;
  std::size_t hidden_dim = 512;
  std::size_t filter_hidden_dim = 128;
  std::size_t length_target = kDefaultLengthTarget;  // 0 disables length normalization
  std::uint64_t seed = 0;

  /// Throws DomainError on out-of-range values.
  void validate() const;
};

// Projection --------------------------------------------------------------

Matrix project(const ProjectorParams& p, const Matrix& x);
/// Rows of the result are unit-norm. ShapeError when m.dim() != p.input_dim().
FeatureMatrix project(const ProjectorParams& p, const FeatureMatrix& m);

// Per-frame refinement losses ----------------------------------------------

/// (L_align, L_uniform) of projected features, neighbours taken from the
/// frozen input features.
std::pair<ScoreSeries, ScoreSeries> refined_losses(const FeatureMatrix& z, const NeighborSets& n);

/// L2-normalized means of consecutive `segment_length` rows; trailing frames
/// past floor(T / m) * m are dropped.
struct SegmentFeatures {
  Matrix vectors;
  std::size_t segment_length = 0;
};
SegmentFeatures segment_features(const Matrix& z, std::size_t segment_length);
SegmentFeatures segment_features(const FeatureMatrix& z, std::size_t segment_length);

/// log mean Gaussian potential between each frame and every segment of the
/// other videos. EmptyBatchError when `others` holds no segment.
ScoreSeries uniqueness_loss(const FeatureMatrix& z, std::span<const SegmentFeatures> others);

/// y = 1 - minmax_scale(u), treated as constant targets.
ScoreSeries filter_targets(const ScoreSeries& u);

/// Mean binary cross-entropy. DomainError when r leaves (0, 1).
double filter_loss(const ScoreSeries& y, const ScoreSeries& r);

/// Sigmoid outputs of the filter for every frame.
ScoreSeries filter_scores(const FilterParams& f, const FeatureMatrix& z);

// Joint objective ------------------------------------------------------------

/// Frozen features of one training video with their neighbour sets.
struct TrainingVideo {
  Matrix features;
  NeighborSets neighbors;
};
TrainingVideo prepare_video(const FeatureMatrix& frozen, double neighbor_ratio);

struct LayerGrad {
  std::vector<double> weight;
  std::vector<double> bias;
  static LayerGrad like(const DenseLayer& l);
};
struct ProjectorGrads {
  LayerGrad input, hidden, output;
  static ProjectorGrads like(const ProjectorParams& p);
};
struct FilterGrads {
  LayerGrad hidden, output;
  static FilterGrads like(const FilterParams& f);
};

struct LossResult {
  double loss = 0.0;     // align + l1 uniform + l2 unique + l3 filter, mean over frames
  double align = 0.0;    // per-term means over frames
  double uniform = 0.0;
  double unique = 0.0;
  double filter = 0.0;
  ProjectorGrads projector_grad;
  FilterGrads filter_grad;

  /// The part of `loss` that depends on the projector; the filter term sees
  /// the projected features through a stop-gradient.
  double projector_objective(const TrainConfig& c) const {
    return align + c.lambda1 * uniform + c.lambda2 * unique;
  }
};

/// Loss and exact gradients over a batch of at least two videos
/// (EmptyBatchError otherwise).
LossResult full_loss(std::span<const TrainingVideo> batch, const ProjectorParams& p,
                     const FilterParams& f, const TrainConfig& c);
LossResult full_loss(std::span<const VideoRecord> batch, const ProjectorParams& p,
                     const FilterParams& f, const TrainConfig& c);

// Optimization ---------------------------------------------------------------

/// Adam with L2 weight decay folded into the gradient.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void step(ProjectorParams& p, FilterParams& f, const ProjectorGrads& gp, const FilterGrads& gf);
  std::size_t steps() const { return steps_; }

 private:
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  std::size_t steps_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct TrainHistory {
  std::vector<double> step_loss;
  std::vector<double> epoch_loss;  // mean step loss per epoch
};

struct TrainResult {
  ProjectorParams projector;
  FilterParams filter;
  TrainHistory history;
};

/// Seeded initialization followed by `epochs` passes of shuffled mini-batch
/// Adam. A trailing batch of one video joins the previous batch. Needs at
/// least two videos; throws TrainingDivergedError on a non-finite loss.
TrainResult train(std::span<const FeatureMatrix> videos, const TrainConfig& c);

/// Parameters in optimizer order, for serialization and inspection.
std::vector<std::span<float>> parameter_tensors(ProjectorParams& p, FilterParams& f);
std::vector<std::span<const float>> parameter_tensors(const ProjectorParams& p,
                                                      const FilterParams& f);

}  // namespace ctsum
