// src/augment.cc

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

#include "kws/augment.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kws/error.h"
#include "kws/fft.h"
#include "kws/kernels.h"

namespace kws {

namespace {

// Below this many multiply-adds the direct kernel beats the FFT.
constexpr std::size_t kDirectConvolutionLimit = std::size_t{1} << 18;

void RequireSameLength(const AudioBuffer &a, const AudioBuffer &b, const char *context) {
  if (a.size() != b.size())
    Fail(ErrorKind::kDimensionMismatch, std::string(context) + ": length mismatch (" +
                                            std::to_string(a.size()) + " vs " +
                                            std::to_string(b.size()) + ")");
  RequireSameRate(a, b, context);
}

}  // namespace

void RoomImpulseResponse::Validate() const {
  Require(!taps.empty(), ErrorKind::kInvalidArgument, "RIR '" + label + "' has no taps");
  Require(sample_rate > 0, ErrorKind::kInvalidArgument, "RIR '" + label + "' has bad rate");
  for (double t : taps)
    Require(std::isfinite(t), ErrorKind::kNumerical, "RIR '" + label + "' has non-finite tap");
}

void SirRange::Validate() const {
  Require(std::isfinite(low_db) && std::isfinite(high_db) && low_db <= high_db,
          ErrorKind::kInvalidArgument,
          "SIR range must satisfy low <= high, got [" + std::to_string(low_db) + ", " +
              std::to_string(high_db) + "]");
}

void AugmentationSpec::Validate() const {
  sir_range.Validate();
  Require(!interference.empty(), ErrorKind::kInvalidArgument,
          "augmentation spec '" + name + "' has no interference clips");
  Require(!rirs.empty(), ErrorKind::kInvalidArgument,
          "augmentation spec '" + name + "' has no room impulse responses");
  for (const auto &rir : rirs) rir.Validate();
}

AudioBuffer Convolve(const AudioBuffer &signal, const RoomImpulseResponse &rir) {
  rir.Validate();
  if (signal.sample_rate() != rir.sample_rate)
    Fail(ErrorKind::kDimensionMismatch,
         "Convolve: signal rate " + std::to_string(signal.sample_rate()) + " differs from RIR '" +
             rir.label + "' rate " + std::to_string(rir.sample_rate));
  if (signal.empty()) return AudioBuffer({}, signal.sample_rate());
  const auto x = signal.samples();
  const std::span<const double> h(rir.taps);
  if (h.size() == 1 || x.size() * h.size() <= kDirectConvolutionLimit) {
    std::vector<double> y(x.size() + h.size() - 1);
    kernels::omp::ConvolveDirect(x, h, y);
    return AudioBuffer(std::move(y), signal.sample_rate());
  }
  return AudioBuffer(ConvolveFft(x, h), signal.sample_rate());
}

double RirEnvelope(std::size_t n, double rt60_seconds, int sample_rate) {
  return std::exp(-3.0 * std::numbers::ln10 * static_cast<double>(n) /
                  (rt60_seconds * sample_rate));
}

RoomImpulseResponse SynthRir(double rt60_seconds, std::size_t length_samples, std::uint64_t seed,
                             std::string label, int sample_rate) {
  Require(rt60_seconds > 0.0 && std::isfinite(rt60_seconds), ErrorKind::kInvalidArgument,
          "SynthRir: rt60 must be positive");
  Require(length_samples >= 1, ErrorKind::kInvalidArgument, "SynthRir: length must be >= 1");
  Rng rng(seed);
  RoomImpulseResponse rir;
  rir.sample_rate = sample_rate;
  rir.label = std::move(label);
  rir.taps.resize(length_samples);
  for (std::size_t n = 0; n < length_samples; ++n)
    rir.taps[n] = rng.Normal() * RirEnvelope(n, rt60_seconds, sample_rate);
  rir.taps[0] = 1.0;
  double peak = 0.0;
  for (double t : rir.taps) peak = std::max(peak, std::abs(t));
  for (double &t : rir.taps) t /= peak;
  return rir;
}

double SampleSir(const SirRange &range, Rng &rng) {
  range.Validate();
  return rng.Uniform(range.low_db, range.high_db);
}

Crop CropRandom(const AudioBuffer &interference, std::size_t length, Rng &rng) {
  Require(length >= 1, ErrorKind::kInvalidArgument, "CropRandom: length must be >= 1");
  Require(!interference.empty(), ErrorKind::kInvalidArgument,
          "CropRandom: interference buffer is empty");
  const auto src = interference.samples();
  if (src.size() < length) {
    std::vector<double> tiled(length);
    for (std::size_t i = 0; i < length; ++i) tiled[i] = src[i % src.size()];
    return {AudioBuffer(std::move(tiled), interference.sample_rate()), 0};
  }
  const std::size_t offset = rng.UniformInt(src.size() - length + 1);
  std::vector<double> seg(src.begin() + offset, src.begin() + offset + length);
  return {AudioBuffer(std::move(seg), interference.sample_rate()), offset};
}

double ComputeAlpha(const AudioBuffer &speech, const AudioBuffer &interference,
                    double target_sir_db) {
  RequireSameLength(speech, interference, "ComputeAlpha");
  Require(std::isfinite(target_sir_db), ErrorKind::kInvalidArgument,
          "ComputeAlpha: target SIR must be finite");
  const double es = Energy(speech);
  const double en = Energy(interference);
  Require(en > 0.0, ErrorKind::kNumerical, "ComputeAlpha: interference has zero energy");
  Require(es > 0.0, ErrorKind::kNumerical, "ComputeAlpha: speech has zero energy");
  return std::sqrt(es) / std::sqrt(en) * std::pow(10.0, -target_sir_db / 20.0);
}

double MeasureSir(const AudioBuffer &speech, const AudioBuffer &scaled_interference) {
  RequireSameLength(speech, scaled_interference, "MeasureSir");
  const double es = Energy(speech);
  const double en = Energy(scaled_interference);
  Require(es > 0.0 && en > 0.0, ErrorKind::kNumerical, "MeasureSir: zero-energy operand");
  return 20.0 * std::log10(std::sqrt(es) / std::sqrt(en));
}

AudioBuffer Mix(const AudioBuffer &utterance, const AudioBuffer &interference, double alpha) {
  RequireSameLength(utterance, interference, "Mix");
  Require(std::isfinite(alpha), ErrorKind::kInvalidArgument, "Mix: alpha must be finite");
  std::vector<double> out(utterance.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = utterance[i] + alpha * interference[i];
  return AudioBuffer(std::move(out), utterance.sample_rate());
}

std::uint64_t UtteranceSeed(std::uint64_t master_seed, std::string_view utterance_id) {
  return Fnv1a64(utterance_id) ^ master_seed;
}

ReverbBank::ReverbBank(const AugmentationSpec &spec)
    : num_clips_(spec.interference.size()), num_rirs_(spec.rirs.size()) {
  spec.Validate();
  reverberated_.resize(num_clips_ * num_rirs_);
  const auto total = static_cast<std::ptrdiff_t>(reverberated_.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    const auto clip = static_cast<std::size_t>(i) / num_rirs_;
    const auto rir = static_cast<std::size_t>(i) % num_rirs_;
    reverberated_[i] = Convolve(spec.interference[clip].audio, spec.rirs[rir]);
  }
}

const AudioBuffer &ReverbBank::Get(std::size_t clip, std::size_t rir) const {
  return reverberated_.at(clip * num_rirs_ + rir);
}

CorruptedUtterance CorruptUtterance(const AudioBuffer &clean, std::string_view utterance_id,
                                    const AugmentationSpec &spec, const ReverbBank &bank) {
  Require(!clean.empty(), ErrorKind::kInvalidArgument, "utterance is empty");
  Rng rng(UtteranceSeed(spec.master_seed, utterance_id));
  const std::size_t clip = rng.UniformInt(bank.num_clips());
  const std::size_t room = rng.UniformInt(bank.num_rirs());
  const AudioBuffer &reverberated = bank.Get(clip, room);
  RequireSameRate(clean, reverberated, "CorruptUtterance");
  Crop crop = CropRandom(reverberated, clean.size(), rng);
  const double sir = SampleSir(spec.sir_range, rng);
  const double alpha = ComputeAlpha(clean, crop.segment, sir);

  CorruptedUtterance out;
  out.audio = Mix(clean, crop.segment, alpha);
  out.record.utterance_id = std::string(utterance_id);
  out.record.interference_id = spec.interference[clip].id;
  out.record.rir_label = spec.rirs[room].label;
  out.record.target_sir_db = sir;
  out.record.alpha = alpha;
  out.record.crop_offset = crop.offset;
  return out;
}

AudioBuffer RecordedInterference(const CorruptionRecord &record, std::size_t length,
                                 const AugmentationSpec &spec, const ReverbBank &bank) {
  auto clip_it =
      std::find_if(spec.interference.begin(), spec.interference.end(),
                   [&](const InterferenceClip &c) { return c.id == record.interference_id; });
  auto rir_it = std::find_if(spec.rirs.begin(), spec.rirs.end(), [&](const RoomImpulseResponse &r) {
    return r.label == record.rir_label;
  });
  Require(clip_it != spec.interference.end() && rir_it != spec.rirs.end(),
          ErrorKind::kInvalidArgument, "record references unknown interference or RIR");
  const AudioBuffer &rev =
      bank.Get(clip_it - spec.interference.begin(), rir_it - spec.rirs.begin());
  const auto src = rev.samples();
  std::vector<double> seg(length);
  if (src.size() < length) {
    for (std::size_t i = 0; i < length; ++i) seg[i] = src[i % src.size()];
  } else {
    Require(record.crop_offset + length <= src.size(), ErrorKind::kInvalidArgument,
            "record crop offset out of range");
    std::copy_n(src.begin() + record.crop_offset, length, seg.begin());
  }
  return Scale(AudioBuffer(std::move(seg), rev.sample_rate()), record.alpha);
}

AugmentReport AugmentCorpus(const std::vector<ManifestEntry> &clean,
                            const std::filesystem::path &clean_manifest_path,
                            const AugmentationSpec &spec, const std::filesystem::path &output_dir) {
  spec.Validate();
  const ReverbBank bank(spec);
  std::filesystem::create_directories(output_dir / "wav");

  const auto n = static_cast<std::ptrdiff_t>(clean.size());
  std::vector<std::optional<ManifestEntry>> produced(clean.size());
  std::vector<std::string> errors(clean.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const ManifestEntry &src = clean[i];
    try {
      AudioBuffer audio = LoadWav(ResolveWav(clean_manifest_path, src.wav));
      CorruptedUtterance out = CorruptUtterance(audio, src.id, spec, bank);
      ManifestEntry entry = src;
      entry.wav = "wav/" + src.id + ".wav";
      entry.corruption = out.record;
      SaveWav(out.audio, output_dir / entry.wav);
      produced[i] = std::move(entry);
    } catch (const std::exception &err) {
      errors[i] = src.id + ": " + err.what();
    }
  }

  AugmentReport report;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (produced[i]) {
      report.records.push_back(*produced[i]->corruption);
      report.manifest.push_back(std::move(*produced[i]));
    } else {
      report.failures.push_back(errors[i]);
    }
  }
  if (report.failures.size() * 100 > clean.size())
    Fail(ErrorKind::kNumerical, "augmentation '" + spec.name + "' failed for " +
                                    std::to_string(report.failures.size()) + " of " +
                                    std::to_string(clean.size()) +
                                    " utterances; first: " + report.failures.front());
  std::sort(report.manifest.begin(), report.manifest.end(),
            [](const ManifestEntry &a, const ManifestEntry &b) { return a.id < b.id; });
  std::sort(report.records.begin(), report.records.end(),
            [](const CorruptionRecord &a, const CorruptionRecord &b) {
              return a.utterance_id < b.utterance_id;
            });
  WriteManifest(report.manifest, output_dir / "manifest.jsonl");
  return report;
}

}  // namespace kws
