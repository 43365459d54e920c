// include/kws/augment.h

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

#ifndef KWS_AUGMENT_H_
#define KWS_AUGMENT_H_

// Corruption of clean utterances with reverberated interference:
//
//   interference = source * rir                       (reverberation)
//   alpha        = sqrt(E_speech / E_interference) * 10^(-SIR/20)
//   corrupted    = utterance + alpha * interference
//
// where E is the sum of squared samples over the whole utterance.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kws/audio.h"
#include "kws/manifest.h"
#include "kws/rng.h"

namespace kws {

struct RoomImpulseResponse {
  std::vector<double> taps;
  int sample_rate = kCanonicalSampleRate;
  std::string label;

  /// At least one tap, all finite, positive rate.
  void Validate() const;
};

struct SirRange {
  double low_db = 0.0;
  double high_db = 40.0;

  void Validate() const;
};

struct InterferenceClip {
  std::string id;
  AudioBuffer audio;
};

/// Everything that determines a corruption run.
struct AugmentationSpec {
  std::string name;
  SirRange sir_range;
  std::vector<InterferenceClip> interference;
  std::vector<RoomImpulseResponse> rirs;
  std::uint64_t master_seed = 0;

  void Validate() const;
};

/// Full linear convolution, length len(signal) + len(taps) - 1. Long inputs
/// go through the FFT; short ones through the direct kernel.
AudioBuffer Convolve(const AudioBuffer &signal, const RoomImpulseResponse &rir);

/// Exponential decay envelope reaching -60 dB at n = rt60 * sample_rate.
double RirEnvelope(std::size_t n, double rt60_seconds, int sample_rate);

/// Seeded synthetic room response: white Gaussian noise shaped by
/// RirEnvelope, with the direct-path tap forced to 1, then scaled so the
/// largest tap magnitude is 1.
RoomImpulseResponse SynthRir(double rt60_seconds, std::size_t length_samples, std::uint64_t seed,
                             std::string label = "", int sample_rate = kCanonicalSampleRate);

double SampleSir(const SirRange &range, Rng &rng);

struct Crop {
  AudioBuffer segment;
  std::size_t offset = 0;
};

/// Contiguous `length`-sample window at a uniform offset. Sources shorter
/// than `length` are tiled to exactly `length` samples (offset 0).
Crop CropRandom(const AudioBuffer &interference, std::size_t length, Rng &rng);

double ComputeAlpha(const AudioBuffer &speech, const AudioBuffer &interference,
                    double target_sir_db);
double MeasureSir(const AudioBuffer &speech, const AudioBuffer &scaled_interference);
/// utterance + alpha * interference, without clipping.
AudioBuffer Mix(const AudioBuffer &utterance, const AudioBuffer &interference, double alpha);

/// Per-utterance seed: FNV-1a of the id bytes XOR the master seed.
std::uint64_t UtteranceSeed(std::uint64_t master_seed, std::string_view utterance_id);

/// Reverberated copy of every (clip, rir) pair of a spec, computed once.
class ReverbBank {
 public:
  explicit ReverbBank(const AugmentationSpec &spec);
  const AudioBuffer &Get(std::size_t clip, std::size_t rir) const;
  std::size_t num_clips() const { return num_clips_; }
  std::size_t num_rirs() const { return num_rirs_; }

 private:
  std::size_t num_clips_ = 0;
  std::size_t num_rirs_ = 0;
  std::vector<AudioBuffer> reverberated_;
};

struct CorruptedUtterance {
  AudioBuffer audio;
  CorruptionRecord record;
};

/// Corrupts one utterance. All random choices (clip, room, crop offset,
/// SIR) come from a generator seeded by UtteranceSeed, so the result does
/// not depend on which other utterances are processed or in what order.
CorruptedUtterance CorruptUtterance(const AudioBuffer &clean, std::string_view utterance_id,
                                    const AugmentationSpec &spec, const ReverbBank &bank);

/// Rebuilds alpha * interference for a record, for verification.
AudioBuffer RecordedInterference(const CorruptionRecord &record, std::size_t length,
                                 const AugmentationSpec &spec, const ReverbBank &bank);

struct AugmentReport {
  std::vector<ManifestEntry> manifest;
  std::vector<CorruptionRecord> records;
  std::vector<std::string> failures;  // "id: reason"
};

/// Corrupts every utterance of a clean manifest in parallel, writes
/// `<output_dir>/wav/<id>.wav` and `<output_dir>/manifest.jsonl`.
/// Utterances that fail are skipped and reported; the run throws when more
/// than 1% of them fail.
AugmentReport AugmentCorpus(const std::vector<ManifestEntry> &clean,
                            const std::filesystem::path &clean_manifest_path,
                            const AugmentationSpec &spec, const std::filesystem::path &output_dir);

}  // namespace kws

#endif  // KWS_AUGMENT_H_
