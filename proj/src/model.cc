// src/model.cc

// Copyright 2026  The kwsaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "kws/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kws/error.h"
#include "kws/kernels.h"
#include "kws/rng.h"

namespace kws {

namespace {

const double kLogFloor = std::log(1e-30);

struct Activations {
  std::vector<Matrix> pre;   // affine outputs of hidden layers
  std::vector<Matrix> post;  // ReLU outputs
  Matrix keyword;            // posteriors
  Matrix aux;
};

void Affine(const Matrix &x, const DenseLayer &layer, Matrix &out) {
  kernels::omp::MatMul(x, layer.weights, out);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.Row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
  }
}

void ColumnSums(const Matrix &m, std::vector<double> &out) {
  out.assign(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.Row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
}

Activations RunForward(const AcousticModel &model, const Matrix &x) {
  Require(x.cols() == model.feature_dim, ErrorKind::kDimensionMismatch,
          "Forward: feature dim " + std::to_string(x.cols()) + " but model expects " +
              std::to_string(model.feature_dim));
  Activations act;
  const Matrix *input = &x;
  for (const auto &layer : model.params.hidden) {
    act.pre.emplace_back();
    Affine(*input, layer, act.pre.back());
    act.post.push_back(act.pre.back());
    for (double &v : act.post.back().values()) v = v > 0.0 ? v : 0.0;
    input = &act.post.back();
  }
  Affine(*input, model.params.keyword_head, act.keyword);
  Affine(*input, model.params.aux_head, act.aux);
  SoftmaxRows(act.keyword);
  SoftmaxRows(act.aux);
  return act;
}

std::vector<bool> ReluMask(const Activations &act) {
  std::vector<bool> mask;
  for (const auto &m : act.pre)
    for (double v : m.values()) mask.push_back(v > 0.0);
  return mask;
}

void CheckTargets(std::span<const int> targets, std::size_t frames, std::size_t classes,
                  const char *head) {
  Require(targets.size() == frames, ErrorKind::kDimensionMismatch,
          std::string(head) + " targets: " + std::to_string(targets.size()) + " for " +
              std::to_string(frames) + " frames");
  for (std::size_t t = 0; t < targets.size(); ++t)
    if (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= classes)
      Fail(ErrorKind::kInvalidArgument,
           std::string(head) + " target " + std::to_string(targets[t]) + " at frame " +
               std::to_string(t) + " outside [0, " + std::to_string(classes) + ")");
}

// d(loss)/d(logits) for one softmax head, already scaled by weight / frames.
Matrix HeadDelta(const Matrix &posteriors, std::span<const int> targets, double scale) {
  Matrix delta(posteriors.rows(), posteriors.cols());
  if (scale == 0.0) return delta;
  for (std::size_t t = 0; t < posteriors.rows(); ++t) {
    const auto p = posteriors.Row(t);
    const auto y = static_cast<std::size_t>(targets[t]);
    // Where the floor is active the loss term is constant.
    if (!(std::log(p[y]) > kLogFloor)) continue;
    auto d = delta.Row(t);
    for (std::size_t c = 0; c < p.size(); ++c) d[c] = scale * p[c];
    d[y] -= scale;
  }
  return delta;
}

DenseLayer MakeLayer(std::size_t in, std::size_t out, Rng &rng) {
  DenseLayer layer{Matrix(in, out), std::vector<double>(out, 0.0)};
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double &w : layer.weights.values()) w = rng.Uniform(-bound, bound);
  return layer;
}

}  // namespace

void ModelConfig::Validate() const {
  Require(hidden_layers >= 0, ErrorKind::kInvalidArgument, "model: hidden_layers must be >= 0");
  Require(hidden_units >= 1 && keyword_states >= 1 && aux_phones >= 1, ErrorKind::kInvalidArgument,
          "model: layer sizes must be >= 1");
  Require(loss_weight_keyword >= 0.0 && loss_weight_aux >= 0.0 &&
              std::abs(loss_weight_keyword + loss_weight_aux - 1.0) < 1e-9,
          ErrorKind::kInvalidArgument, "model: loss weights must be >= 0 and sum to 1");
  Require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorKind::kInvalidArgument,
          "model: learning rate must be finite and >= 0");
  Require(batch_size >= 1 && epochs >= 0, ErrorKind::kInvalidArgument,
          "model: batch_size >= 1 and epochs >= 0 required");
}

std::vector<std::span<double>> Parameters::Blocks() {
  std::vector<std::span<double>> out;
  for (auto &l : hidden) {
    out.push_back(l.weights.values());
    out.push_back(l.bias);
  }
  out.push_back(keyword_head.weights.values());
  out.push_back(keyword_head.bias);
  out.push_back(aux_head.weights.values());
  out.push_back(aux_head.bias);
  return out;
}

std::vector<std::span<const double>> Parameters::Blocks() const {
  std::vector<std::span<const double>> out;
  for (auto block : const_cast<Parameters *>(this)->Blocks()) out.emplace_back(block);
  return out;
}

std::size_t Parameters::Count() const {
  std::size_t n = 0;
  for (auto block : Blocks()) n += block.size();
  return n;
}

Parameters Parameters::ZerosLike() const {
  Parameters z = *this;
  for (auto block : z.Blocks()) std::fill(block.begin(), block.end(), 0.0);
  return z;
}

bool Parameters::AllFinite() const {
  for (auto block : Blocks())
    for (double v : block)
      if (!std::isfinite(v)) return false;
  return true;
}

AcousticModel InitModel(const ModelConfig &config, std::size_t feature_dim) {
  config.Validate();
  Require(feature_dim >= 1, ErrorKind::kInvalidArgument, "InitModel: feature_dim must be >= 1");
  AcousticModel model;
  model.config = config;
  model.feature_dim = feature_dim;
  Rng rng(config.init_seed);
  std::size_t in = feature_dim;
  for (int l = 0; l < config.hidden_layers; ++l) {
    model.params.hidden.push_back(MakeLayer(in, config.hidden_units, rng));
    in = config.hidden_units;
  }
  model.params.keyword_head = MakeLayer(in, config.keyword_states, rng);
  model.params.aux_head = MakeLayer(in, config.aux_phones, rng);
  return model;
}

void SoftmaxRows(Matrix &logits) {
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.Row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double &v : row) {
      v = std::exp(v - peak);
      sum += v;
    }
    for (double &v : row) v /= sum;
  }
}

Posteriors Forward(const AcousticModel &model, const Matrix &features) {
  Activations act = RunForward(model, features);
  return {std::move(act.keyword), std::move(act.aux)};
}

Posteriors Forward(const AcousticModel &model, const FeatureMatrix &features) {
  return Forward(model, features.values);
}

double CrossEntropy(const Matrix &posteriors, std::span<const int> targets) {
  CheckTargets(targets, posteriors.rows(), posteriors.cols(), "cross-entropy");
  if (targets.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t)
    sum -= std::max(std::log(posteriors(t, static_cast<std::size_t>(targets[t]))), kLogFloor);
  return sum / static_cast<double>(targets.size());
}

double WeightedCeLoss(const Matrix &kw_posteriors, const Matrix &aux_posteriors,
                      std::span<const int> kw_targets, std::span<const int> aux_targets,
                      LossWeights weights) {
  double loss = weights.keyword * CrossEntropy(kw_posteriors, kw_targets);
  if (weights.aux != 0.0) loss += weights.aux * CrossEntropy(aux_posteriors, aux_targets);
  return loss;
}

double LossAndGradient(const AcousticModel &model, const Matrix &features,
                       std::span<const int> kw_targets, std::span<const int> aux_targets,
                       Parameters &gradient) {
  const Activations act = RunForward(model, features);
  const std::size_t frames = features.rows();
  CheckTargets(kw_targets, frames, act.keyword.cols(), "keyword");
  CheckTargets(aux_targets, frames, act.aux.cols(), "aux");
  const LossWeights w{model.config.loss_weight_keyword, model.config.loss_weight_aux};
  const double loss = WeightedCeLoss(act.keyword, act.aux, kw_targets, aux_targets, w);

  gradient = model.params.ZerosLike();
  const double inv = frames ? 1.0 / static_cast<double>(frames) : 0.0;
  const Matrix d_kw = HeadDelta(act.keyword, kw_targets, w.keyword * inv);
  const Matrix d_aux = HeadDelta(act.aux, aux_targets, w.aux * inv);

  const std::size_t depth = model.params.hidden.size();
  const Matrix &top = depth ? act.post.back() : features;
  kernels::omp::MatMulTransA(top, d_kw, gradient.keyword_head.weights);
  ColumnSums(d_kw, gradient.keyword_head.bias);
  kernels::omp::MatMulTransA(top, d_aux, gradient.aux_head.weights);
  ColumnSums(d_aux, gradient.aux_head.bias);
  if (depth == 0) return loss;

  Matrix d_hidden, tmp;
  kernels::omp::MatMulTransB(d_kw, model.params.keyword_head.weights, d_hidden);
  kernels::omp::MatMulTransB(d_aux, model.params.aux_head.weights, tmp);
  for (std::size_t i = 0; i < d_hidden.values().size(); ++i) d_hidden.data()[i] += tmp.data()[i];

  for (std::size_t l = depth; l-- > 0;) {
    const Matrix &pre = act.pre[l];
    for (std::size_t i = 0; i < d_hidden.values().size(); ++i)
      if (!(pre.data()[i] > 0.0)) d_hidden.data()[i] = 0.0;
    const Matrix &below = l ? act.post[l - 1] : features;
    kernels::omp::MatMulTransA(below, d_hidden, gradient.hidden[l].weights);
    ColumnSums(d_hidden, gradient.hidden[l].bias);
    if (l > 0) {
      kernels::omp::MatMulTransB(d_hidden, model.params.hidden[l].weights, tmp);
      std::swap(d_hidden, tmp);
    }
  }
  return loss;
}

double FrameAccuracy(const Matrix &posteriors, std::span<const int> targets) {
  Require(targets.size() == posteriors.rows(), ErrorKind::kDimensionMismatch,
          "FrameAccuracy: target count differs from frame count");
  if (targets.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto row = posteriors.Row(t);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    hits += best == targets[t];
  }
  return static_cast<double>(hits) / static_cast<double>(targets.size());
}

std::vector<double> EstimatePriors(std::span<const int> targets, int num_classes) {
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 1.0);
  for (int t : targets) {
    Require(t >= 0 && t < num_classes, ErrorKind::kInvalidArgument,
            "EstimatePriors: target out of range");
    counts[static_cast<std::size_t>(t)] += 1.0;
  }
  const double total = static_cast<double>(targets.size()) + num_classes;
  for (double &c : counts) c /= total;
  return counts;
}

void TrainingData::Validate(const ModelConfig &config) const {
  Require(kw_targets.size() == frames() && aux_targets.size() == frames(),
          ErrorKind::kDimensionMismatch, "training data: target streams differ from frame count");
  CheckTargets(kw_targets, frames(), static_cast<std::size_t>(config.keyword_states), "keyword");
  CheckTargets(aux_targets, frames(), static_cast<std::size_t>(config.aux_phones), "aux");
}

TrainResult Train(AcousticModel model, const TrainingData &data, const TrainingData *dev) {
  const ModelConfig &config = model.config;
  config.Validate();
  data.Validate(config);
  Require(data.frames() > 0, ErrorKind::kInvalidArgument, "Train: no training frames");
  Require(data.features.cols() == model.feature_dim, ErrorKind::kDimensionMismatch,
          "Train: feature dim differs from model");
  model.state_priors = EstimatePriors(data.kw_targets, config.keyword_states);

  TrainResult result;
  const std::size_t n = data.frames();
  const std::size_t dim = data.features.cols();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(DeriveSeed(config.init_seed, "shuffle"));

  double lr = config.learning_rate;
  double previous = std::numeric_limits<double>::infinity();
  Matrix x;
  std::vector<int> kw, aux;
  Parameters grad;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.UniformInt(i + 1)]);
    double total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
      const std::size_t size = std::min(batch, n - start);
      x.Resize(size, dim);
      kw.resize(size);
      aux.resize(size);
      for (std::size_t b = 0; b < size; ++b) {
        const std::size_t src = order[start + b];
        const auto row = data.features.Row(src);
        std::copy(row.begin(), row.end(), x.Row(b).begin());
        kw[b] = data.kw_targets[src];
        aux[b] = data.aux_targets[src];
      }
      const double loss = LossAndGradient(model, x, kw, aux, grad);
      if (!std::isfinite(loss))
        Fail(ErrorKind::kNumerical, "training diverged: loss " + std::to_string(loss) +
                                        " in epoch " + std::to_string(epoch) + ", batch " +
                                        std::to_string(batch_index));
      auto params = model.params.Blocks();
      const auto grads = grad.Blocks();
      for (std::size_t k = 0; k < params.size(); ++k)
        for (std::size_t i = 0; i < params[k].size(); ++i) params[k][i] -= lr * grads[k][i];
      total += loss * static_cast<double>(size);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = total / static_cast<double>(n);
    stats.learning_rate = lr;
    stats.dev_accuracy = std::numeric_limits<double>::quiet_NaN();
    if (dev != nullptr && dev->frames() > 0)
      stats.dev_accuracy = FrameAccuracy(Forward(model, dev->features).keyword, dev->kw_targets);
    result.history.push_back(stats);
    if (config.halve_on_plateau && stats.loss > previous * 0.99) lr *= 0.5;
    previous = stats.loss;
  }
  result.model = std::move(model);
  return result;
}

GradientCheckResult GradientCheck(const AcousticModel &model, const Matrix &features,
                                  std::span<const int> kw_targets, std::span<const int> aux_targets,
                                  const GradientCheckOptions &options) {
  Parameters analytic;
  LossAndGradient(model, features, kw_targets, aux_targets, analytic);
  if (options.mutate_gradient) options.mutate_gradient(analytic);

  AcousticModel probe = model;
  const LossWeights w{model.config.loss_weight_keyword, model.config.loss_weight_aux};
  auto evaluate = [&](std::vector<bool> &mask) {
    Activations act = RunForward(probe, features);
    mask = ReluMask(act);
    return WeightedCeLoss(act.keyword, act.aux, kw_targets, aux_targets, w);
  };
  std::vector<bool> base_mask, plus_mask, minus_mask;
  evaluate(base_mask);

  // Flat index -> (block, offset).
  auto blocks = probe.params.Blocks();
  const auto grad_blocks = analytic.Blocks();
  std::vector<std::size_t> starts{0};
  for (auto b : blocks) starts.push_back(starts.back() + b.size());
  const std::size_t total = starts.back();

  std::vector<std::size_t> chosen(total);
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (options.num_parameters < total) {
    Rng rng(options.seed);
    for (std::size_t i = 0; i < options.num_parameters; ++i)
      std::swap(chosen[i], chosen[i + rng.UniformInt(total - i)]);
    chosen.resize(options.num_parameters);
  }
  for (std::size_t idx : options.include)
    if (idx < total && std::find(chosen.begin(), chosen.end(), idx) == chosen.end())
      chosen.push_back(idx);

  GradientCheckResult result;
  for (std::size_t idx : chosen) {
    const auto bi = static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), idx) -
                                             starts.begin() - 1);
    double &p = blocks[bi][idx - starts[bi]];
    const double original = p;
    p = original + options.step;
    const double up = evaluate(plus_mask);
    p = original - options.step;
    const double down = evaluate(minus_mask);
    p = original;
    if (plus_mask != base_mask || minus_mask != base_mask) {
      ++result.skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * options.step);
    const double backprop = grad_blocks[bi][idx - starts[bi]];
    const double denom = std::max({std::abs(numeric), std::abs(backprop), 1e-6});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(numeric - backprop) / denom);
    ++result.checked;
  }
  return result;
}

}  // namespace kws
