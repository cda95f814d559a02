#include "ctsum/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ctsum/error.hpp"
#include "ctsum/seed.hpp"

namespace ctsum {

namespace {

void affine(const DenseLayer& l, std::span<const double> in, std::span<double> out) {
  const float* w = l.weight.data();
  for (std::size_t o = 0; o < l.out; ++o) {
    double acc = l.bias[o];
    const float* wr = w + o * l.in;
    for (std::size_t i = 0; i < l.in; ++i) acc += static_cast<double>(wr[i]) * in[i];
    out[o] = acc;
  }
}

// dW += grad_out in^T, db += grad_out for one sample of y = W x + b.
void accumulate_layer(LayerGrad& g, std::span<const double> grad_out, std::span<const double> in) {
  const std::size_t n_in = in.size();
  for (std::size_t o = 0; o < grad_out.size(); ++o) {
    const double go = grad_out[o];
    if (go == 0.0) continue;
    double* gw = g.weight.data() + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) gw[i] += go * in[i];
    g.bias[o] += go;
  }
}

// grad_in = W^T grad_out
void backprop_input(const DenseLayer& l, std::span<const double> grad_out,
                    std::span<double> grad_in) {
  std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (std::size_t o = 0; o < l.out; ++o) {
    const double go = grad_out[o];
    if (go == 0.0) continue;
    const float* wr = l.weight.data() + o * l.in;
    for (std::size_t i = 0; i < l.in; ++i) grad_in[i] += static_cast<double>(wr[i]) * go;
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct ProjectorCache {
  Matrix u;                 // T x d, input projection
  Matrix act;               // T x h, tanh activations
  std::vector<double> norm; // pre-normalization row norms
  Matrix z;                 // T x d, unit rows
};

ProjectorCache forward(const ProjectorParams& p, const Matrix& x) {
  if (x.cols != p.input_dim()) {
    throw ShapeError("projector expects dimension " + std::to_string(p.input_dim()) + ", got " +
                     std::to_string(x.cols));
  }
  const std::size_t frames = x.rows, d = p.proj_dim(), h = p.hidden_dim();
  ProjectorCache c{Matrix(frames, d), Matrix(frames, h), std::vector<double>(frames),
                   Matrix(frames, d)};
  std::vector<double> branch(d);
  for (std::size_t t = 0; t < frames; ++t) {
    auto u = c.u.row(t);
    affine(p.input, x.row(t), u);
    auto a = c.act.row(t);
    affine(p.hidden, u, a);
    for (double& v : a) v = std::tanh(v);
    affine(p.output, a, branch);
    auto z = c.z.row(t);
    for (std::size_t i = 0; i < d; ++i) z[i] = u[i] + branch[i];
    const double n = std::sqrt(dot(z, z));
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw DegenerateFeatureError("projected frame " + std::to_string(t) + " has zero norm");
    }
    c.norm[t] = n;
    for (double& v : z) v /= n;
  }
  return c;
}

void backward(const ProjectorParams& p, const Matrix& x, const ProjectorCache& c,
              const Matrix& grad_z, ProjectorGrads& g) {
  const std::size_t d = p.proj_dim(), h = p.hidden_dim();
  std::vector<double> gv(d), gact(h), gu(d);
  for (std::size_t t = 0; t < x.rows; ++t) {
    auto gz = grad_z.row(t);
    auto z = c.z.row(t);
    const double proj = dot(z, gz);
    for (std::size_t i = 0; i < d; ++i) gv[i] = (gz[i] - z[i] * proj) / c.norm[t];

    auto act = c.act.row(t);
    accumulate_layer(g.output, gv, act);
    backprop_input(p.output, gv, gact);
    for (std::size_t k = 0; k < h; ++k) gact[k] *= 1.0 - act[k] * act[k];

    auto u = c.u.row(t);
    accumulate_layer(g.hidden, gact, u);
    backprop_input(p.hidden, gact, gu);
    for (std::size_t i = 0; i < d; ++i) gu[i] += gv[i];
    accumulate_layer(g.input, gu, x.row(t));
  }
}

struct FilterCache {
  Matrix act;                  // T x h_f
  std::vector<double> logits;  // T
};

FilterCache filter_forward(const FilterParams& f, const Matrix& z) {
  if (z.cols != f.input_dim()) {
    throw ShapeError("filter expects dimension " + std::to_string(f.input_dim()) + ", got " +
                     std::to_string(z.cols));
  }
  FilterCache c{Matrix(z.rows, f.hidden_dim()), std::vector<double>(z.rows)};
  for (std::size_t t = 0; t < z.rows; ++t) {
    auto a = c.act.row(t);
    affine(f.hidden, z.row(t), a);
    for (double& v : a) v = std::tanh(v);
    double logit = 0.0;
    affine(f.output, a, std::span<double>(&logit, 1));
    c.logits[t] = logit;
  }
  return c;
}

struct SegmentCache {
  Matrix vectors;            // unit segment features
  std::vector<double> norm;  // norms of the segment means
};

SegmentCache pool_segments(const Matrix& z, std::size_t m) {
  if (m == 0) throw DomainError("segment length must be at least 1");
  const std::size_t count = z.rows / m;
  if (count == 0) {
    throw ShapeError("video with " + std::to_string(z.rows) + " frames is shorter than one " +
                     std::to_string(m) + "-frame segment");
  }
  SegmentCache c{Matrix(count, z.cols), std::vector<double>(count)};
  for (std::size_t l = 0; l < count; ++l) {
    auto s = c.vectors.row(l);
    for (std::size_t r = l * m; r < (l + 1) * m; ++r) {
      auto zr = z.row(r);
      for (std::size_t i = 0; i < z.cols; ++i) s[i] += zr[i];
    }
    for (double& v : s) v /= static_cast<double>(m);
    const double n = std::sqrt(dot(s, s));
    if (!(n > 0.0)) throw DegenerateFeatureError("segment " + std::to_string(l) + " has zero mean");
    c.norm[l] = n;
    for (double& v : s) v /= n;
  }
  return c;
}

LossResult full_loss_impl(std::span<const TrainingVideo* const> batch, const ProjectorParams& p,
                          const FilterParams& f, const TrainConfig& c) {
  if (batch.size() < 2) throw EmptyBatchError("the joint loss needs at least two videos");
  c.validate();
  if (f.input_dim() != p.proj_dim()) throw ShapeError("filter input does not match projector output");

  const std::size_t n_videos = batch.size();
  const std::size_t d = p.proj_dim();
  std::vector<ProjectorCache> caches;
  std::vector<SegmentCache> segments;
  std::size_t total_frames = 0;
  for (const TrainingVideo* v : batch) {
    if (v->neighbors.frames() != v->features.rows) {
      throw ShapeError("neighbor sets do not match the video's frame count");
    }
    if (v->features.rows < 2) throw TooShortError("training videos need at least 2 frames");
    caches.push_back(forward(p, v->features));
    segments.push_back(pool_segments(caches.back().z, c.segment_length));
    total_frames += v->features.rows;
  }
  const double inv_n = 1.0 / static_cast<double>(total_frames);

  LossResult res;
  res.projector_grad = ProjectorGrads::like(p);
  res.filter_grad = FilterGrads::like(f);
  std::vector<Matrix> grad_z, grad_s;
  for (std::size_t k = 0; k < n_videos; ++k) {
    grad_z.emplace_back(caches[k].z.rows, d);
    grad_s.emplace_back(segments[k].vectors.rows, d);
  }

  double align_sum = 0.0, uniform_sum = 0.0, unique_sum = 0.0, filter_sum = 0.0;
  std::vector<double> args, diff(d);

  for (std::size_t k = 0; k < n_videos; ++k) {
    const Matrix& z = caches[k].z;
    Matrix& gz = grad_z[k];
    const std::size_t frames = z.rows;
    const NeighborSets& nb = batch[k]->neighbors;
    const Matrix dist = kernels::squared_distances(z, z);

    auto pull_pair = [&](std::size_t t, std::span<const double> other, double coef,
                         std::span<double> g_other) {
      // adds coef * d|z_t - other|^2 to both endpoints
      auto zt = z.row(t);
      auto gt = gz.row(t);
      for (std::size_t i = 0; i < d; ++i) {
        const double g = 2.0 * coef * (zt[i] - other[i]);
        gt[i] += g;
        g_other[i] -= g;
      }
    };

    // local alignment
    const double align_coef = inv_n / static_cast<double>(nb.k());
    for (std::size_t t = 0; t < frames; ++t) {
      double acc = 0.0;
      for (std::uint32_t j : nb.of(t)) {
        acc += dist(t, j);
        pull_pair(t, z.row(j), align_coef, gz.row(j));
      }
      align_sum += acc / static_cast<double>(nb.k());
    }

    // global uniformity
    const double log_rest = std::log(static_cast<double>(frames - 1));
    for (std::size_t t = 0; t < frames; ++t) {
      args.clear();
      for (std::size_t j = 0; j < frames; ++j) {
        if (j != t) args.push_back(-2.0 * dist(t, j));
      }
      const double lse = log_sum_exp(args);
      uniform_sum += lse - log_rest;
      if (c.lambda1 == 0.0) continue;
      std::size_t pos = 0;
      for (std::size_t j = 0; j < frames; ++j) {
        if (j == t) continue;
        const double w = std::exp(args[pos++] - lse);
        pull_pair(t, z.row(j), -2.0 * c.lambda1 * inv_n * w, gz.row(j));
      }
    }

    // uniqueness against the other videos' segments
    std::vector<std::pair<std::size_t, std::size_t>> owners;
    for (std::size_t o = 0; o < n_videos; ++o) {
      if (o == k) continue;
      for (std::size_t l = 0; l < segments[o].vectors.rows; ++l) owners.emplace_back(o, l);
    }
    Matrix keys(owners.size(), d);
    for (std::size_t a = 0; a < owners.size(); ++a) {
      auto src = segments[owners[a].first].vectors.row(owners[a].second);
      std::copy(src.begin(), src.end(), keys.row(a).begin());
    }
    const Matrix udist = kernels::squared_distances(z, keys);
    const double log_a = std::log(static_cast<double>(owners.size()));
    std::vector<double> unique_vals(frames);
    args.resize(owners.size());
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t a = 0; a < owners.size(); ++a) args[a] = -2.0 * udist(t, a);
      const double lse = log_sum_exp(args);
      unique_vals[t] = lse - log_a;
      unique_sum += unique_vals[t];
      if (c.lambda2 == 0.0) continue;
      for (std::size_t a = 0; a < owners.size(); ++a) {
        const double w = std::exp(args[a] - lse);
        pull_pair(t, keys.row(a), -2.0 * c.lambda2 * inv_n * w,
                  grad_s[owners[a].first].row(owners[a].second));
      }
    }

    // uniqueness filter on detached features
    const ScoreSeries targets = filter_targets({unique_vals, ScoreKind::kRawLoss});
    const FilterCache fc = filter_forward(f, z);
    std::vector<double> gact(f.hidden_dim());
    for (std::size_t t = 0; t < frames; ++t) {
      const double logit = fc.logits[t];
      const double y = targets.values[t];
      filter_sum += softplus(logit) - y * logit;
      if (c.lambda3 == 0.0) continue;
      const double glogit = c.lambda3 * inv_n * (sigmoid(logit) - y);
      auto act = fc.act.row(t);
      accumulate_layer(res.filter_grad.output, std::span<const double>(&glogit, 1), act);
      for (std::size_t q = 0; q < gact.size(); ++q) {
        gact[q] = glogit * f.output.weight[q] * (1.0 - act[q] * act[q]);
      }
      accumulate_layer(res.filter_grad.hidden, gact, z.row(t));
    }
  }

  // segment pooling: s = mean / |mean|
  for (std::size_t k = 0; k < n_videos; ++k) {
    const SegmentCache& sc = segments[k];
    for (std::size_t l = 0; l < sc.vectors.rows; ++l) {
      auto gs = grad_s[k].row(l);
      auto s = sc.vectors.row(l);
      const double proj = dot(s, gs);
      for (std::size_t i = 0; i < d; ++i) {
        diff[i] = (gs[i] - s[i] * proj) / (sc.norm[l] * static_cast<double>(c.segment_length));
      }
      for (std::size_t r = l * c.segment_length; r < (l + 1) * c.segment_length; ++r) {
        auto gz = grad_z[k].row(r);
        for (std::size_t i = 0; i < d; ++i) gz[i] += diff[i];
      }
    }
  }

  for (std::size_t k = 0; k < n_videos; ++k) {
    backward(p, batch[k]->features, caches[k], grad_z[k], res.projector_grad);
  }

  res.align = align_sum * inv_n;
  res.uniform = uniform_sum * inv_n;
  res.unique = unique_sum * inv_n;
  res.filter = filter_sum * inv_n;
  res.loss = res.align + c.lambda1 * res.uniform + c.lambda2 * res.unique + c.lambda3 * res.filter;
  return res;
}

}  // namespace

// Parameters -----------------------------------------------------------------

DenseLayer DenseLayer::zeros(std::size_t in, std::size_t out) {
  return DenseLayer{in, out, std::vector<float>(in * out, 0.0f), std::vector<float>(out, 0.0f)};
}

DenseLayer DenseLayer::xavier(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  DenseLayer l = zeros(in, out);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (float& w : l.weight) w = static_cast<float>(dist(rng));
  return l;
}

ProjectorParams ProjectorParams::init(std::size_t input_dim, std::size_t proj_dim,
                                      std::size_t hidden_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ProjectorParams p;
  p.input = DenseLayer::xavier(input_dim, proj_dim, rng);
  p.hidden = DenseLayer::xavier(proj_dim, hidden_dim, rng);
  p.output = DenseLayer::xavier(hidden_dim, proj_dim, rng);
  return p;
}

ProjectorParams ProjectorParams::identity(std::size_t input_dim, std::size_t proj_dim,
                                          std::size_t hidden_dim) {
  ProjectorParams p{DenseLayer::zeros(input_dim, proj_dim), DenseLayer::zeros(proj_dim, hidden_dim),
                    DenseLayer::zeros(hidden_dim, proj_dim)};
  for (std::size_t i = 0; i < std::min(input_dim, proj_dim); ++i) {
    p.input.weight[i * input_dim + i] = 1.0f;
  }
  return p;
}

FilterParams FilterParams::init(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FilterParams f;
  f.hidden = DenseLayer::xavier(input_dim, hidden_dim, rng);
  f.output = DenseLayer::xavier(hidden_dim, 1, rng);
  return f;
}

void TrainConfig::validate() const {
  if (!(neighbor_ratio > 0.0 && neighbor_ratio <= 1.0)) {
    throw DomainError("neighbor ratio must be in (0, 1]");
  }
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) throw DomainError("loss weights must be >= 0");
  if (!(lr > 0.0)) throw DomainError("learning rate must be positive");
  if (weight_decay < 0.0) throw DomainError("weight decay must be >= 0");
  if (batch_size < 2) throw DomainError("batch size must be at least 2");
  if (segment_length == 0) throw DomainError("segment length must be at least 1");
  if (proj_dim == 0 || hidden_dim == 0 || filter_hidden_dim == 0) {
    throw DomainError("layer widths must be positive");
  }
}

LayerGrad LayerGrad::like(const DenseLayer& l) {
  return LayerGrad{std::vector<double>(l.weight.size(), 0.0), std::vector<double>(l.bias.size(), 0.0)};
}

ProjectorGrads ProjectorGrads::like(const ProjectorParams& p) {
  return {LayerGrad::like(p.input), LayerGrad::like(p.hidden), LayerGrad::like(p.output)};
}

FilterGrads FilterGrads::like(const FilterParams& f) {
  return {LayerGrad::like(f.hidden), LayerGrad::like(f.output)};
}

std::vector<std::span<float>> parameter_tensors(ProjectorParams& p, FilterParams& f) {
  std::vector<std::span<float>> out;
  for (DenseLayer* l : {&p.input, &p.hidden, &p.output, &f.hidden, &f.output}) {
    out.emplace_back(l->weight);
    out.emplace_back(l->bias);
  }
  return out;
}

std::vector<std::span<const float>> parameter_tensors(const ProjectorParams& p,
                                                      const FilterParams& f) {
  std::vector<std::span<const float>> out;
  for (const DenseLayer* l : {&p.input, &p.hidden, &p.output, &f.hidden, &f.output}) {
    out.emplace_back(l->weight);
    out.emplace_back(l->bias);
  }
  return out;
}

// Forward operations -----------------------------------------------------------

Matrix project(const ProjectorParams& p, const Matrix& x) { return forward(p, x).z; }

FeatureMatrix project(const ProjectorParams& p, const FeatureMatrix& m) {
  if (m.dim() != p.input_dim()) {
    throw ShapeError("projector expects dimension " + std::to_string(p.input_dim()) + ", got " +
                     std::to_string(m.dim()));
  }
  // float rounding keeps rows within the unit-norm tolerance
  return forward(p, Matrix::from(m)).z.to_features(true);
}

std::pair<ScoreSeries, ScoreSeries> refined_losses(const FeatureMatrix& z, const NeighborSets& n) {
  if (n.frames() != z.frames()) throw ShapeError("neighbor sets do not match frame count");
  const Matrix zm = Matrix::from(z);
  const Matrix dist = kernels::squared_distances(zm, zm);
  return {ScoreSeries{kernels::local_alignment(dist, n), ScoreKind::kRawLoss},
          ScoreSeries{kernels::log_mean_potential_self(dist), ScoreKind::kRawLoss}};
}

SegmentFeatures segment_features(const Matrix& z, std::size_t segment_length) {
  return {pool_segments(z, segment_length).vectors, segment_length};
}

SegmentFeatures segment_features(const FeatureMatrix& z, std::size_t segment_length) {
  return segment_features(Matrix::from(z), segment_length);
}

ScoreSeries uniqueness_loss(const FeatureMatrix& z, std::span<const SegmentFeatures> others) {
  std::size_t total = 0;
  for (const auto& s : others) {
    if (s.vectors.rows > 0 && s.vectors.cols != z.dim()) {
      throw ShapeError("segment features do not match the frame dimension");
    }
    total += s.vectors.rows;
  }
  if (total == 0) throw EmptyBatchError("uniqueness loss needs segments from other videos");
  Matrix keys(total, z.dim());
  std::size_t pos = 0;
  for (const auto& s : others) {
    std::copy(s.vectors.data.begin(), s.vectors.data.end(),
              keys.data.begin() + static_cast<std::ptrdiff_t>(pos * z.dim()));
    pos += s.vectors.rows;
  }
  const Matrix dist = kernels::squared_distances(Matrix::from(z), keys);
  return {kernels::log_mean_potential(dist), ScoreKind::kRawLoss};
}

ScoreSeries filter_targets(const ScoreSeries& u) {
  ScoreSeries y = minmax_scale(u);
  for (double& v : y.values) v = 1.0 - v;
  return y;
}

double filter_loss(const ScoreSeries& y, const ScoreSeries& r) {
  if (y.size() != r.size()) throw ShapeError("targets and predictions differ in length");
  if (y.size() == 0) throw ShapeError("filter loss of an empty series");
  double acc = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double rt = r.values[t], yt = y.values[t];
    if (!(rt > 0.0 && rt < 1.0)) throw DomainError("filter output outside (0, 1)");
    if (!(yt >= 0.0 && yt <= 1.0)) throw DomainError("filter target outside [0, 1]");
    acc += -(yt * std::log(rt) + (1.0 - yt) * std::log(1.0 - rt));
  }
  return acc / static_cast<double>(y.size());
}

ScoreSeries filter_scores(const FilterParams& f, const FeatureMatrix& z) {
  const FilterCache c = filter_forward(f, Matrix::from(z));
  ScoreSeries out{std::vector<double>(c.logits.size()), ScoreKind::kRawLoss};
  for (std::size_t t = 0; t < c.logits.size(); ++t) out.values[t] = sigmoid(c.logits[t]);
  return out;
}

TrainingVideo prepare_video(const FeatureMatrix& frozen, double neighbor_ratio) {
  const FeatureMatrix& x = frozen;
  if (!x.normalized()) {
    const FeatureMatrix n = l2_normalize_rows(x);
    return {Matrix::from(n), cosine_neighbors(n, neighbor_ratio)};
  }
  return {Matrix::from(x), cosine_neighbors(x, neighbor_ratio)};
}

LossResult full_loss(std::span<const TrainingVideo> batch, const ProjectorParams& p,
                     const FilterParams& f, const TrainConfig& c) {
  std::vector<const TrainingVideo*> ptrs;
  for (const auto& v : batch) ptrs.push_back(&v);
  return full_loss_impl(ptrs, p, f, c);
}

LossResult full_loss(std::span<const VideoRecord> batch, const ProjectorParams& p,
                     const FilterParams& f, const TrainConfig& c) {
  std::vector<TrainingVideo> prepared;
  for (const auto& v : batch) prepared.push_back(prepare_video(v.features, c.neighbor_ratio));
  return full_loss(prepared, p, f, c);
}

// Optimization -------------------------------------------------------------------

AdamOptimizer::AdamOptimizer(double lr, double weight_decay, double beta1, double beta2, double eps)
    : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(ProjectorParams& p, FilterParams& f, const ProjectorGrads& gp,
                         const FilterGrads& gf) {
  auto params = parameter_tensors(p, f);
  const std::vector<const std::vector<double>*> grads = {
      &gp.input.weight,  &gp.input.bias,  &gp.hidden.weight, &gp.hidden.bias, &gp.output.weight,
      &gp.output.bias,   &gf.hidden.weight, &gf.hidden.bias, &gf.output.weight, &gf.output.bias};
  if (m_.empty()) {
    for (const auto& t : params) {
      m_.emplace_back(t.size(), 0.0);
      v_.emplace_back(t.size(), 0.0);
    }
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& w = params[k];
    const auto& g = *grads[k];
    if (g.size() != w.size()) throw ShapeError("gradient does not match parameter shape");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] + weight_decay_ * static_cast<double>(w[i]);
      m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * gi;
      v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * gi * gi;
      const double update = lr_ * (m_[k][i] / bc1) / (std::sqrt(v_[k][i] / bc2) + eps_);
      w[i] = static_cast<float>(static_cast<double>(w[i]) - update);
    }
  }
}

TrainResult train(std::span<const FeatureMatrix> videos, const TrainConfig& c) {
  c.validate();
  if (videos.size() < 2) throw EmptyBatchError("training needs at least two videos");
  const std::size_t input_dim = videos.front().dim();

  std::vector<TrainingVideo> prepared;
  prepared.reserve(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) {
    if (videos[i].dim() != input_dim) throw ShapeError("training videos differ in feature dimension");
    const FeatureMatrix x = c.length_target > 0
                                ? normalize_length(videos[i], c.length_target, derive_seed(c.seed, 1000 + i))
                                : videos[i];
    prepared.push_back(prepare_video(x, c.neighbor_ratio));
  }

  TrainResult res{ProjectorParams::init(input_dim, c.proj_dim, c.hidden_dim, derive_seed(c.seed, 0)),
                  FilterParams::init(c.proj_dim, c.filter_hidden_dim, derive_seed(c.seed, 1)),
                  {}};
  AdamOptimizer opt(c.lr, c.weight_decay);
  std::mt19937_64 shuffle_rng(derive_seed(c.seed, 2));
  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < c.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::vector<std::vector<const TrainingVideo*>> batches;
    for (std::size_t start = 0; start < order.size(); start += c.batch_size) {
      std::vector<const TrainingVideo*> b;
      for (std::size_t i = start; i < std::min(order.size(), start + c.batch_size); ++i) {
        b.push_back(&prepared[order[i]]);
      }
      if (b.size() == 1 && !batches.empty()) {
        batches.back().push_back(b.front());
      } else {
        batches.push_back(std::move(b));
      }
    }
    double epoch_sum = 0.0;
    for (const auto& b : batches) {
      LossResult lr = full_loss_impl(b, res.projector, res.filter, c);
      if (!std::isfinite(lr.loss)) {
        throw TrainingDivergedError("loss became non-finite at epoch " + std::to_string(epoch));
      }
      opt.step(res.projector, res.filter, lr.projector_grad, lr.filter_grad);
      res.history.step_loss.push_back(lr.loss);
      epoch_sum += lr.loss;
    }
    res.history.epoch_loss.push_back(epoch_sum / static_cast<double>(batches.size()));
  }
  return res;
}

}  // namespace ctsum
