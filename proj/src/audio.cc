// src/audio.cc

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

#include "kws/audio.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "kws/error.h"

namespace kws {

namespace {

std::uint32_t ReadU32(const std::vector<unsigned char> &b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t ReadU16(const std::vector<unsigned char> &b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void PutU32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string &out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  Require(sample_rate_ > 0, ErrorKind::kInvalidArgument,
          "AudioBuffer: sample rate must be positive, got " + std::to_string(sample_rate_));
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i]))
      Fail(ErrorKind::kNumerical, "AudioBuffer: non-finite sample at index " + std::to_string(i));
  }
}

AudioBuffer LoadWav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open WAV file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE")
    Fail(ErrorKind::kUnsupportedFormat, "not a RIFF/WAVE file" + where);

  bool have_fmt = false;
  int sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string id(bytes.begin() + pos, bytes.begin() + pos + 4);
    std::uint32_t size = ReadU32(bytes, pos + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size())
      Fail(ErrorKind::kUnsupportedFormat, "truncated '" + id + "' chunk" + where);
    if (id == "fmt ") {
      if (size < 16) Fail(ErrorKind::kUnsupportedFormat, "short fmt chunk" + where);
      std::uint16_t format = ReadU16(bytes, body);
      std::uint16_t channels = ReadU16(bytes, body + 2);
      std::uint32_t rate = ReadU32(bytes, body + 4);
      std::uint16_t bits = ReadU16(bytes, body + 14);
      if (format != 1)
        Fail(ErrorKind::kUnsupportedFormat,
             "unsupported WAV format tag " + std::to_string(format) + " (expected PCM=1)" + where);
      if (channels != 1)
        Fail(ErrorKind::kUnsupportedFormat,
             "unsupported channel count " + std::to_string(channels) + " (expected mono)" + where);
      if (bits != 16)
        Fail(ErrorKind::kUnsupportedFormat,
             "unsupported bits per sample " + std::to_string(bits) + " (expected 16)" + where);
      if (rate == 0) Fail(ErrorKind::kUnsupportedFormat, "zero sample rate" + where);
      sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) Fail(ErrorKind::kUnsupportedFormat, "data chunk before fmt chunk" + where);
      std::vector<double> samples(size / 2);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        auto pcm = static_cast<std::int16_t>(ReadU16(bytes, body + 2 * i));
        samples[i] = pcm / 32768.0;
      }
      return AudioBuffer(std::move(samples), sample_rate);
    }
    pos = body + size + (size & 1);
  }
  Fail(ErrorKind::kUnsupportedFormat, "no data chunk" + where);
}

std::int16_t QuantizeSample(double sample) {
  double clipped = std::clamp(sample, -1.0, 1.0);
  double q = std::nearbyint(clipped * 32768.0);
  return static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
}

void SaveWav(const AudioBuffer &buffer, const std::filesystem::path &path) {
  const auto n = static_cast<std::uint32_t>(buffer.size());
  const auto rate = static_cast<std::uint32_t>(buffer.sample_rate());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  PutU32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, rate);
  PutU32(out, rate * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, 2 * n);
  for (double s : buffer.samples()) PutU16(out, static_cast<std::uint16_t>(QuantizeSample(s)));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) Fail(ErrorKind::kIo, "cannot write WAV file: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) Fail(ErrorKind::kIo, "short write to " + path.string());
}

double Energy(std::span<const double> samples) {
  double sum = 0.0;
  for (double s : samples) sum += s * s;
  return sum;
}

double Energy(const AudioBuffer &buffer) { return Energy(buffer.samples()); }

AudioBuffer Scale(const AudioBuffer &buffer, double factor) {
  Require(std::isfinite(factor), ErrorKind::kInvalidArgument, "Scale: factor must be finite");
  std::vector<double> out(buffer.samples().begin(), buffer.samples().end());
  for (double &s : out) s *= factor;
  return AudioBuffer(std::move(out), buffer.sample_rate());
}

void RequireSameRate(const AudioBuffer &a, const AudioBuffer &b, std::string_view context) {
  if (a.sample_rate() != b.sample_rate())
    Fail(ErrorKind::kDimensionMismatch, std::string(context) + ": sample rate mismatch (" +
                                            std::to_string(a.sample_rate()) + " vs " +
                                            std::to_string(b.sample_rate()) + ")");
}

}  // namespace kws
