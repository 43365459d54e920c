// include/kws/features.h

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

#ifndef KWS_FEATURES_H_
#define KWS_FEATURES_H_

#include <filesystem>
#include <span>
#include <vector>

#include "kws/audio.h"
#include "kws/matrix.h"

namespace kws {

struct FeatureConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int num_mel_bins = 20;
  int fft_size = 512;
  int context_left = 3;
  int context_right = 3;
  double log_floor = 1e-10;
  int sample_rate = kCanonicalSampleRate;

  std::size_t WindowSamples() const;
  std::size_t HopSamples() const;
  std::size_t StackedDim() const;
  void Validate() const;
};

/// Frames x dims, dims = num_mel_bins * (context_left + 1 + context_right).
struct FeatureMatrix {
  Matrix values;
  double frame_hop_ms = 10.0;

  std::size_t frames() const { return values.rows(); }
  std::size_t dims() const { return values.cols(); }
};

/// 1 + floor((N - window) / hop), or 0 when N < window.
std::size_t NumFrames(std::size_t num_samples, const FeatureConfig &config);

/// Center sample of frame t; used to map frames onto segment labels.
std::size_t FrameCenter(std::size_t frame, const FeatureConfig &config);

/// Triangular filters on the HTK mel scale spanning 0 Hz to Nyquist.
class MelFilterbank {
 public:
  MelFilterbank(int num_bins, int fft_size, int sample_rate);
  int num_bins() const { return num_bins_; }
  /// mel[b] = sum_k weight(b, k) * power[k]
  void Apply(std::span<const double> power, std::span<double> mel) const;
  double Weight(int bin, int fft_bin) const { return weights_(bin, fft_bin); }

  static double HzToMel(double hz);
  static double MelToHz(double mel);

 private:
  int num_bins_;
  Matrix weights_;
};

/// Log mel energies before normalization: Hann window, power spectrum,
/// mel filterbank, natural log floored at log_floor.
Matrix ComputeLogMel(const AudioBuffer &audio, const FeatureConfig &config);

/// Subtracts each column's mean over frames.
void MeanNormalize(Matrix &values);

/// Row t becomes [x(t-left) ... x(t+right)], indices clamped to the edges.
Matrix StackContext(const Matrix &values, int left, int right);

/// The full frontend: ComputeLogMel, MeanNormalize, StackContext.
FeatureMatrix ComputeFeatures(const AudioBuffer &audio, const FeatureConfig &config);

/// Features for many utterances. Serial version kept as the reference.
std::vector<FeatureMatrix> ComputeFeaturesSerial(std::span<const AudioBuffer> audio,
                                                 const FeatureConfig &config);
/// OpenMP version, parallel over utterances.
std::vector<FeatureMatrix> ComputeFeaturesParallel(std::span<const AudioBuffer> audio,
                                                   const FeatureConfig &config);

/// Debug dump: "KWSF", u32 frames, u32 dims, u32 reserved (0), then
/// frames*dims little-endian float32 values in row-major order.
void WriteFeatureDump(const FeatureMatrix &features, const std::filesystem::path &path);
FeatureMatrix ReadFeatureDump(const std::filesystem::path &path);

}  // namespace kws

#endif  // KWS_FEATURES_H_
