// include/kws/config.h

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

#ifndef KWS_CONFIG_H_
#define KWS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kws/augment.h"
#include "kws/corpus.h"
#include "kws/features.h"
#include "kws/manifest.h"
#include "kws/model.h"

namespace kws {

struct RirSetConfig {
  std::string name;
  std::vector<double> rt60_seconds;
  int rooms_per_rt60 = 1;
};

/// A named corruption: interference set, RIR set and SIR range applied to
/// the training side (train + dev) or the test side of the clean corpus.
struct AugmentConfig {
  std::string name;
  bool for_training = true;
  std::string interference;
  std::string rirs;
  SirRange sir;
};

struct TrainConfig {
  std::string targets = "forced_align";  // or "construction"
  int bootstrap_epochs = 4;
};

struct DecoderConfig {
  int states_per_phone = 1;
  double self_loop = 0.8;
  std::vector<double> entry_penalties = {-4, -2, 0, 2, 4, 6, 8};
  std::vector<double> thresholds = {-2, -1, 0, 0.5, 1, 1.5, 2, 3, 4};
};

struct EvalConfig {
  double far_low = 0.01;
  double far_high = 0.5;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  CorpusConfig corpus;
  std::vector<InterferenceConfig> interference;
  std::vector<RirSetConfig> rir_sets;
  FeatureConfig features;
  ModelConfig model;
  TrainConfig train;
  std::vector<AugmentConfig> augment;
  DecoderConfig decoder;
  EvalConfig eval;

  /// Names resolve, ranges are valid, model output sizes match the corpus.
  void Validate() const;
  const AugmentConfig &Augment(std::string_view name) const;
  const InterferenceConfig &Interference(std::string_view name) const;
  const RirSetConfig &Rirs(std::string_view name) const;
  /// "clean" followed by the training-side augmentation names.
  std::vector<std::string> TrainingCorpora() const;
  /// "clean" followed by the test-side augmentation names.
  std::vector<std::string> TestConditions() const;
  /// Keyword-head size implied by the keyword and topology.
  int KeywordStates() const;
};

/// Parses TOML text; `source` names the input in error messages. Model
/// output sizes are derived from the corpus and decoder sections.
ExperimentConfig ParseConfig(std::string_view toml, const std::string &source = "config");
ExperimentConfig LoadConfig(const std::filesystem::path &path);

/// Stable JSON rendering of every field, used for hashing.
std::string CanonicalConfig(const ExperimentConfig &config);

/// Sets the global seed and the per-stage seeds derived from it.
void ApplySeed(ExperimentConfig &config, std::uint64_t seed);

}  // namespace kws

#endif  // KWS_CONFIG_H_
