// include/kws/corpus.h

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

#ifndef KWS_CORPUS_H_
#define KWS_CORPUS_H_

// Synthetic keyword corpus. Every phone is a pair of tones at fixed
// formant-like frequencies, so segment boundaries (and therefore frame
// targets) are known exactly by construction.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kws/audio.h"
#include "kws/decoder.h"
#include "kws/features.h"
#include "kws/manifest.h"
#include "kws/model.h"
#include "kws/rng.h"

namespace kws {

struct Phone {
  std::string symbol;
  double f1 = 0.0;  // Hz
  double f2 = 0.0;  // Hz
};

struct PhoneSet {
  std::vector<Phone> phones;

  /// Twelve phones; the default keyword uses six of them.
  static PhoneSet Default();
  /// Index of `symbol`, or -1.
  int Index(std::string_view symbol) const;
  std::vector<std::string> Symbols() const;
  std::size_t size() const { return phones.size(); }
  /// Unique symbols (none equal to "sil"), frequencies in (0, Nyquist),
  /// pairwise distinct signatures.
  void Validate(int sample_rate) const;
};

struct Range {
  double low = 0.0;
  double high = 0.0;
};

struct CorpusConfig {
  PhoneSet phone_set = PhoneSet::Default();
  std::vector<std::string> keyword = {"ah", "l", "eh", "k", "s", "ah"};
  // Utterances per split and class.
  int train_positive = 500;
  int train_negative = 500;
  int dev_positive = 100;
  int dev_negative = 100;
  int test_positive = 200;
  int test_negative = 200;
  Range phone_ms = {50.0, 100.0};
  Range silence_ms = {100.0, 200.0};
  int max_fillers = 2;             // per side of the keyword
  Range negative_phones = {4, 8};  // phone count of negatives
  Range tone_amplitude = {0.02, 0.035};
  Range utterance_gain = {0.5, 1.0};
  double frequency_jitter = 0.03;  // relative, per utterance
  double noise_level = 0.002;      // peak of the uniform background noise
  int sample_rate = kCanonicalSampleRate;
  std::uint64_t seed = 0;

  int TotalPositive() const { return train_positive + dev_positive + test_positive; }
  int TotalNegative() const { return train_negative + dev_negative + test_negative; }
  void Validate() const;
};

/// Aux-head classes: the phone set followed by silence.
int NumAuxClasses(const PhoneSet &phones);
int SilenceClass(const PhoneSet &phones);

/// True when `keyword` occurs as a contiguous run inside `phones`.
bool ContainsKeyword(std::span<const std::string> phones, std::span<const std::string> keyword);

struct Utterance {
  ManifestEntry entry;
  AudioBuffer audio;
};

/// Renders one utterance. Content and audio depend only on the config and
/// the id, never on which other utterances are generated.
Utterance RenderUtterance(const CorpusConfig &config, const std::string &id, bool keyword);

/// All utterances ("pos-0001"..., "neg-0001"...), split into train/dev/test
/// according to the configured counts, sorted by id.
std::vector<Utterance> GenerateCorpus(const CorpusConfig &config);

/// Writes wav/<id>.wav and {train,dev,test}.jsonl under `dir`.
void WriteCorpus(const std::vector<Utterance> &corpus, const std::filesystem::path &dir);

/// Seeded per-class shuffle, then largest-remainder partition by `ratios`
/// (train, dev, test), so each split keeps the global class balance.
std::vector<ManifestEntry> SplitManifest(std::vector<ManifestEntry> entries,
                                         std::array<double, 3> ratios, std::uint64_t seed);

struct InterferenceConfig {
  std::string name;
  std::string kind;  // "music" | "movie"
  double total_seconds = 60.0;
  double clip_seconds = 10.0;
  int sample_rate = kCanonicalSampleRate;
  void Validate() const;
};

/// One chord: f0, 2 f0 and 3 f0 with decaying amplitudes and short ramps.
AudioBuffer RenderChord(double f0, std::size_t length, double amplitude, Rng &rng,
                        int sample_rate = kCanonicalSampleRate);

/// Synthetic interference in clips of at most clip_seconds.
std::vector<std::pair<InterferenceEntry, AudioBuffer>> GenerateInterference(
    const InterferenceConfig &config, std::uint64_t seed);

/// Writes wav/<id>.wav and manifest.jsonl under `dir`.
void WriteInterference(const std::vector<std::pair<InterferenceEntry, AudioBuffer>> &clips,
                       const std::filesystem::path &dir);

struct FrameTargets {
  std::vector<int> keyword;
  std::vector<int> aux;
};

/// Keyword-head and aux-head targets from the known segment boundaries.
/// A frame takes the segment containing its center sample; keyword phones
/// are divided evenly among their sub-states.
FrameTargets ConstructionTargets(const ManifestEntry &entry, std::span<const std::string> keyword,
                                 std::size_t num_frames, const FeatureConfig &features,
                                 const PhoneSet &phones, int states_per_phone);

/// One position of the ground-truth state chain of an utterance.
struct ChainPosition {
  int keyword_state = 0;
  int aux_class = 0;
};

/// Silence segments map to background non-speech, filler phones to
/// background speech, keyword phones to their chain sub-states.
std::vector<ChainPosition> GroundTruthChain(const ManifestEntry &entry,
                                            std::span<const std::string> keyword,
                                            const PhoneSet &phones, int states_per_phone);

/// Forced alignment of the ground-truth chain against the model outputs:
/// position scores are the keyword-state scaled log-likelihood plus the
/// aux log-posterior of the position's phone.
FrameTargets AlignTargets(const ManifestEntry &entry, std::span<const std::string> keyword,
                          const Posteriors &posteriors, std::span<const double> priors,
                          const PhoneSet &phones, const HmmTopology &topology);

}  // namespace kws

#endif  // KWS_CORPUS_H_
