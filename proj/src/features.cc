// src/features.cc

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

#include "kws/features.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "kws/error.h"
#include "kws/fft.h"

namespace kws {

std::size_t FeatureConfig::WindowSamples() const {
  return static_cast<std::size_t>(std::lround(window_ms * sample_rate / 1000.0));
}

std::size_t FeatureConfig::HopSamples() const {
  return static_cast<std::size_t>(std::lround(hop_ms * sample_rate / 1000.0));
}

std::size_t FeatureConfig::StackedDim() const {
  return static_cast<std::size_t>(num_mel_bins) *
         static_cast<std::size_t>(context_left + 1 + context_right);
}

void FeatureConfig::Validate() const {
  Require(hop_ms > 0.0 && window_ms >= hop_ms && HopSamples() > 0, ErrorKind::kInvalidArgument,
          "feature config: need window >= hop > 0");
  Require(num_mel_bins >= 2, ErrorKind::kInvalidArgument, "feature config: need >= 2 mel bins");
  Require(fft_size > 0 && static_cast<std::size_t>(fft_size) >= WindowSamples(),
          ErrorKind::kInvalidArgument, "feature config: fft_size smaller than the window");
  Require(context_left >= 0 && context_right >= 0, ErrorKind::kInvalidArgument,
          "feature config: negative context");
  Require(log_floor > 0.0, ErrorKind::kInvalidArgument, "feature config: log_floor must be > 0");
  Require(sample_rate > 0, ErrorKind::kInvalidArgument, "feature config: bad sample rate");
}

std::size_t NumFrames(std::size_t num_samples, const FeatureConfig &config) {
  const std::size_t win = config.WindowSamples();
  if (num_samples < win) return 0;
  return 1 + (num_samples - win) / config.HopSamples();
}

std::size_t FrameCenter(std::size_t frame, const FeatureConfig &config) {
  return frame * config.HopSamples() + config.WindowSamples() / 2;
}

double MelFilterbank::HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelFilterbank::MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int num_bins, int fft_size, int sample_rate)
    : num_bins_(num_bins), weights_(num_bins, fft_size / 2 + 1) {
  const double mel_hi = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(num_bins + 2);
  for (int i = 0; i < num_bins + 2; ++i) edges[i] = mel_hi * i / (num_bins + 1);
  for (int k = 0; k <= fft_size / 2; ++k) {
    const double mel = HzToMel(static_cast<double>(k) * sample_rate / fft_size);
    for (int b = 0; b < num_bins; ++b) {
      const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
      double w = 0.0;
      if (mel > lo && mel <= mid)
        w = (mel - lo) / (mid - lo);
      else if (mel > mid && mel < hi)
        w = (hi - mel) / (hi - mid);
      weights_(b, k) = w;
    }
  }
}

void MelFilterbank::Apply(std::span<const double> power, std::span<double> mel) const {
  for (int b = 0; b < num_bins_; ++b) {
    double acc = 0.0;
    const auto row = weights_.Row(b);
    for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * power[k];
    mel[b] = acc;
  }
}

Matrix ComputeLogMel(const AudioBuffer &audio, const FeatureConfig &config) {
  config.Validate();
  Require(audio.sample_rate() == config.sample_rate, ErrorKind::kDimensionMismatch,
          "features: audio rate " + std::to_string(audio.sample_rate()) +
              " differs from configured rate " + std::to_string(config.sample_rate));
  const std::size_t frames = NumFrames(audio.size(), config);
  Require(frames > 0, ErrorKind::kInvalidArgument,
          "features: audio shorter than one analysis window (" + std::to_string(audio.size()) +
              " samples)");
  const std::size_t win = config.WindowSamples();
  const std::size_t hop = config.HopSamples();

  std::vector<double> hann(win);
  for (std::size_t n = 0; n < win; ++n)
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (win - 1));

  const PowerSpectrum spectrum(static_cast<std::size_t>(config.fft_size));
  const MelFilterbank fbank(config.num_mel_bins, config.fft_size, config.sample_rate);
  Matrix out(frames, config.num_mel_bins);
  std::vector<double> frame(win), power(spectrum.num_bins());
  const auto samples = audio.samples();
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < win; ++n) frame[n] = samples[t * hop + n] * hann[n];
    spectrum.Compute(frame, power);
    auto row = out.Row(t);
    fbank.Apply(power, row);
    for (double &v : row) v = std::log(std::max(v, config.log_floor));
  }
  return out;
}

void MeanNormalize(Matrix &values) {
  if (values.rows() == 0) return;
  // Deviations from row 0 are averaged so a constant column maps to exact zeros.
  std::vector<double> ref(values.Row(0).begin(), values.Row(0).end());
  std::vector<double> offset(values.cols(), 0.0);
  for (std::size_t t = 0; t < values.rows(); ++t)
    for (std::size_t c = 0; c < values.cols(); ++c) offset[c] += values(t, c) - ref[c];
  for (double &m : offset) m /= static_cast<double>(values.rows());
  for (std::size_t t = 0; t < values.rows(); ++t)
    for (std::size_t c = 0; c < values.cols(); ++c)
      values(t, c) = (values(t, c) - ref[c]) - offset[c];
}

Matrix StackContext(const Matrix &values, int left, int right) {
  const auto frames = static_cast<std::ptrdiff_t>(values.rows());
  const std::size_t dim = values.cols();
  Matrix out(values.rows(), dim * static_cast<std::size_t>(left + 1 + right));
  for (std::ptrdiff_t t = 0; t < frames; ++t) {
    auto dst = out.Row(t);
    std::size_t at = 0;
    for (std::ptrdiff_t off = -left; off <= right; ++off) {
      const std::ptrdiff_t src = std::clamp<std::ptrdiff_t>(t + off, 0, frames - 1);
      const auto row = values.Row(src);
      std::copy(row.begin(), row.end(), dst.begin() + at);
      at += dim;
    }
  }
  return out;
}

FeatureMatrix ComputeFeatures(const AudioBuffer &audio, const FeatureConfig &config) {
  Matrix logmel = ComputeLogMel(audio, config);
  MeanNormalize(logmel);
  return FeatureMatrix{StackContext(logmel, config.context_left, config.context_right),
                       config.hop_ms};
}

std::vector<FeatureMatrix> ComputeFeaturesSerial(std::span<const AudioBuffer> audio,
                                                 const FeatureConfig &config) {
  std::vector<FeatureMatrix> out;
  out.reserve(audio.size());
  for (const auto &a : audio) out.push_back(ComputeFeatures(a, config));
  return out;
}

std::vector<FeatureMatrix> ComputeFeaturesParallel(std::span<const AudioBuffer> audio,
                                                   const FeatureConfig &config) {
  std::vector<FeatureMatrix> out(audio.size());
  std::vector<std::string> errors(audio.size());
  const auto n = static_cast<std::ptrdiff_t>(audio.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = ComputeFeatures(audio[i], config);
    } catch (const std::exception &err) {
      errors[i] = err.what();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      Fail(ErrorKind::kInvalidArgument, "utterance " + std::to_string(i) + ": " + errors[i]);
  return out;
}

namespace {

void PutU32(std::ostream &out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

std::uint32_t GetU32(std::istream &in) {
  unsigned char b[4] = {};
  in.read(reinterpret_cast<char *>(b), 4);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void WriteFeatureDump(const FeatureMatrix &features, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write feature dump: " + path.string());
  out.write("KWSF", 4);
  PutU32(out, static_cast<std::uint32_t>(features.frames()));
  PutU32(out, static_cast<std::uint32_t>(features.dims()));
  PutU32(out, 0);
  for (double v : features.values.values())
    PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

FeatureMatrix ReadFeatureDump(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open feature dump: " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (std::memcmp(magic, "KWSF", 4) != 0)
    Fail(ErrorKind::kUnsupportedFormat, "bad feature dump magic in " + path.string());
  const std::uint32_t frames = GetU32(in);
  const std::uint32_t dims = GetU32(in);
  GetU32(in);
  FeatureMatrix fm;
  fm.values.Resize(frames, dims);
  for (double &v : fm.values.values()) v = std::bit_cast<float>(GetU32(in));
  if (!in) Fail(ErrorKind::kUnsupportedFormat, "truncated feature dump " + path.string());
  return fm;
}

}  // namespace kws
