// include/kws/audio.h

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

#ifndef KWS_AUDIO_H_
#define KWS_AUDIO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace kws {

inline constexpr int kCanonicalSampleRate = 16000;

/// Mono PCM signal held as doubles. Immutable once built; every sample is
/// finite and the sample rate is positive.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(std::vector<double> samples, int sample_rate);

  std::span<const double> samples() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  friend bool operator==(const AudioBuffer &, const AudioBuffer &) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = kCanonicalSampleRate;
};

/// Reads a RIFF/WAVE file holding 16-bit signed mono PCM. Samples are
/// divided by 32768. Any other encoding is rejected with an error naming
/// the offending header field.
AudioBuffer LoadWav(const std::filesystem::path &path);

/// Writes 16-bit mono PCM. Samples are hard-clipped to [-1, 1] and then
/// rounded to the nearest integer step of 1/32768.
void SaveWav(const AudioBuffer &buffer, const std::filesystem::path &path);

/// The PCM value SaveWav stores for one sample.
std::int16_t QuantizeSample(double sample);

/// Sum of squared samples.
double Energy(const AudioBuffer &buffer);
double Energy(std::span<const double> samples);

AudioBuffer Scale(const AudioBuffer &buffer, double factor);

/// Throws kDimensionMismatch unless both buffers share a sample rate.
void RequireSameRate(const AudioBuffer &a, const AudioBuffer &b, std::string_view context);

}  // namespace kws

#endif  // KWS_AUDIO_H_
