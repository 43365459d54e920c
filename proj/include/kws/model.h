// include/kws/model.h

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

#ifndef KWS_MODEL_H_
#define KWS_MODEL_H_

// Feedforward acoustic model with two softmax heads sharing one ReLU trunk:
// the keyword head scores the decoding-graph states, the auxiliary head
// scores phones. Training minimises
//
//   w_kw * mean_t(-ln p_kw[t, y_kw]) + w_aux * mean_t(-ln p_aux[t, y_aux])
//
// with plain mini-batch SGD.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kws/features.h"
#include "kws/matrix.h"

namespace kws {

struct ModelConfig {
  int hidden_layers = 3;
  int hidden_units = 128;
  int keyword_states = 8;
  int aux_phones = 13;
  double loss_weight_keyword = 0.9;
  double loss_weight_aux = 0.1;
  double learning_rate = 0.05;
  int batch_size = 256;
  int epochs = 10;
  std::uint64_t init_seed = 1;
  /// Halve the learning rate after an epoch whose loss improved by < 1%.
  bool halve_on_plateau = true;

  void Validate() const;
};

/// y = x * weights + bias, weights stored inputs x outputs.
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;

  std::size_t inputs() const { return weights.rows(); }
  std::size_t outputs() const { return weights.cols(); }
};

/// Trainable parameters. Gradients use the same type.
struct Parameters {
  std::vector<DenseLayer> hidden;
  DenseLayer keyword_head;
  DenseLayer aux_head;

  /// Weight and bias blocks in a fixed order: hidden layers, keyword head,
  /// aux head; weights before bias within a layer.
  std::vector<std::span<double>> Blocks();
  std::vector<std::span<const double>> Blocks() const;
  std::size_t Count() const;
  /// Same shapes, all zeros.
  Parameters ZerosLike() const;
  bool AllFinite() const;
};

struct AcousticModel {
  ModelConfig config;
  std::size_t feature_dim = 0;
  Parameters params;
  /// Keyword-state priors for the hybrid likelihood conversion; empty until
  /// training targets have been seen.
  std::vector<double> state_priors;
};

/// Per-frame posteriors; each row sums to 1.
struct Posteriors {
  Matrix keyword;
  Matrix aux;
};

struct LossWeights {
  double keyword = 0.9;
  double aux = 0.1;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
AcousticModel InitModel(const ModelConfig &config, std::size_t feature_dim);

Posteriors Forward(const AcousticModel &model, const Matrix &features);
Posteriors Forward(const AcousticModel &model, const FeatureMatrix &features);

/// Row-wise softmax with max subtraction, in place.
void SoftmaxRows(Matrix &logits);

/// Log-probabilities are floored at ln(1e-30).
double WeightedCeLoss(const Matrix &kw_posteriors, const Matrix &aux_posteriors,
                      std::span<const int> kw_targets, std::span<const int> aux_targets,
                      LossWeights weights);

/// Mean cross-entropy of one head (the same floor applies).
double CrossEntropy(const Matrix &posteriors, std::span<const int> targets);

/// Loss of one batch and its gradient with respect to every parameter.
double LossAndGradient(const AcousticModel &model, const Matrix &features,
                       std::span<const int> kw_targets, std::span<const int> aux_targets,
                       Parameters &gradient);

/// Fraction of rows whose argmax equals the target.
double FrameAccuracy(const Matrix &posteriors, std::span<const int> targets);

/// Add-one smoothed class frequencies.
std::vector<double> EstimatePriors(std::span<const int> targets, int num_classes);

/// Frames of many utterances stacked together, with both target streams.
struct TrainingData {
  Matrix features;
  std::vector<int> kw_targets;
  std::vector<int> aux_targets;

  std::size_t frames() const { return features.rows(); }
  void Validate(const ModelConfig &config) const;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double learning_rate = 0.0;
  /// Keyword-head frame accuracy on held-out data, NaN when none was given.
  double dev_accuracy = 0.0;
};

struct TrainResult {
  AcousticModel model;
  std::vector<EpochStats> history;
};

/// Mini-batch SGD. Frames are reshuffled every epoch by a generator derived
/// from config.init_seed, batches run in sequence, so results are
/// reproducible bit for bit. Throws kNumerical naming the batch if the
/// loss becomes NaN.
TrainResult Train(AcousticModel model, const TrainingData &data, const TrainingData *dev = nullptr);

struct GradientCheckOptions {
  std::size_t num_parameters = 200;
  double step = 1e-5;
  std::uint64_t seed = 0;
  /// Flat parameter indices (Blocks() order) that are always checked.
  std::vector<std::size_t> include;
  /// Applied to the backpropagated gradient before comparison; used to
  /// confirm the check notices a wrong gradient.
  std::function<void(Parameters &)> mutate_gradient;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  /// Parameters whose central difference crossed a ReLU kink.
  std::size_t skipped = 0;
};

/// Central finite differences against backprop on randomly chosen
/// parameters. Relative error is |a - b| / max(|a|, |b|, 1e-6).
GradientCheckResult GradientCheck(const AcousticModel &model, const Matrix &features,
                                  std::span<const int> kw_targets, std::span<const int> aux_targets,
                                  const GradientCheckOptions &options = {});

/// JSON document with version "kws-model-v1"; parameters are base64 of
/// little-endian float32.
void SaveModel(const AcousticModel &model, const std::filesystem::path &path);
AcousticModel LoadModel(const std::filesystem::path &path);

std::string Base64Encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> Base64Decode(std::string_view text);

}  // namespace kws

#endif  // KWS_MODEL_H_
