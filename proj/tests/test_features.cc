// tests/test_features.cc

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

#include <cmath>

#include "doctest.h"
#include "kws/error.h"
#include "kws/features.h"
#include "test_util.h"

namespace kws {
namespace {

// Sum of sinusoids plus a little noise; keeps every mel bin off the floor.
AudioBuffer Tones(Rng &rng, std::size_t n) {
  std::vector<double> x(n);
  const double f1 = rng.Uniform(200, 3000), f2 = rng.Uniform(3000, 7000);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kCanonicalSampleRate;
    x[i] = 0.3 * std::sin(2 * M_PI * f1 * t) + 0.2 * std::sin(2 * M_PI * f2 * t) +
           rng.Uniform(-0.01, 0.01);
  }
  return AudioBuffer(std::move(x), kCanonicalSampleRate);
}

}  // namespace

TEST_CASE("frame count") {
  const FeatureConfig c;
  CHECK(c.WindowSamples() == 400);
  CHECK(c.HopSamples() == 160);
  CHECK(NumFrames(16000, c) == 98);
  CHECK(NumFrames(400, c) == 1);
  CHECK(NumFrames(399, c) == 0);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 400 + rng.UniformInt(40000);
    CHECK(NumFrames(n, c) == 1 + (n - 400) / 160);
  }
  const FeatureMatrix f = ComputeFeatures(Tones(rng, 16000), c);
  CHECK(f.frames() == 98);
  CHECK(f.frame_hop_ms == 10.0);
}

TEST_CASE("stacked dimension") {
  FeatureConfig c;
  CHECK(c.StackedDim() == 140);
  Rng rng(2);
  CHECK(ComputeFeatures(Tones(rng, 4000), c).dims() == 140);
  c.context_left = 0;
  c.context_right = 0;
  CHECK(c.StackedDim() == 20);
}

TEST_CASE("all-zero audio") {
  const FeatureConfig c;
  const AudioBuffer zeros(std::vector<double>(8000, 0.0), kCanonicalSampleRate);
  const Matrix raw = ComputeLogMel(zeros, c);
  REQUIRE(raw.rows() == NumFrames(8000, c));
  for (double v : raw.values()) CHECK(v == std::log(1e-10));
  const FeatureMatrix f = ComputeFeatures(zeros, c);
  for (double v : f.values.values()) CHECK(v == 0.0);
}

TEST_CASE("too short audio and wrong rate are rejected") {
  const FeatureConfig c;
  CHECK_THROWS_AS(ComputeFeatures(AudioBuffer(std::vector<double>(399, 0.1), 16000), c), KwsError);
  CHECK_THROWS_AS(ComputeFeatures(AudioBuffer(std::vector<double>(4000, 0.1), 8000), c), KwsError);
  FeatureConfig bad;
  bad.fft_size = 256;
  CHECK_THROWS_AS(bad.Validate(), KwsError);
}

TEST_CASE("HTK mel scale") {
  CHECK(MelFilterbank::HzToMel(0.0) == 0.0);
  CHECK(MelFilterbank::HzToMel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  CHECK(MelFilterbank::HzToMel(1000.0) == doctest::Approx(1000.0).epsilon(1e-4));
  for (double hz : {50.0, 440.0, 3999.0, 8000.0}) {
    CHECK(MelFilterbank::MelToHz(MelFilterbank::HzToMel(hz)) == doctest::Approx(hz));
  }
  const MelFilterbank fb(20, 512, 16000);
  for (int b = 0; b < 20; ++b) {
    double peak = 0.0;
    for (int k = 0; k <= 256; ++k) {
      CHECK(fb.Weight(b, k) >= 0.0);
      peak = std::max(peak, fb.Weight(b, k));
    }
    CHECK(peak > 0.0);
    CHECK(peak <= 1.0);
  }
}

TEST_CASE("amplitude scaling shifts log-mel by 2 ln a and leaves features unchanged") {
  const FeatureConfig c;
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const AudioBuffer x = Tones(rng, 3200 + rng.UniformInt(8000));
    const double a = rng.Uniform(0.05, 3.0);
    const Matrix r1 = ComputeLogMel(x, c), r2 = ComputeLogMel(Scale(x, a), c);
    for (double v : r1.values()) REQUIRE(v > std::log(1e-10) + 1.0);
    for (std::size_t i = 0; i < r1.values().size(); ++i) {
      CHECK(std::abs(r2.values()[i] - r1.values()[i] - 2 * std::log(a)) < 1e-9);
    }
    const FeatureMatrix f1 = ComputeFeatures(x, c), f2 = ComputeFeatures(Scale(x, a), c);
    for (std::size_t i = 0; i < f1.values.values().size(); ++i) {
      CHECK(std::abs(f1.values.values()[i] - f2.values.values()[i]) < 1e-6);
    }
  }
}

TEST_CASE("mean normalization zeroes each column mean") {
  Rng rng(4);
  Matrix m = test::RandomMatrix(rng, 17, 5, -3, 7);
  MeanNormalize(m);
  for (std::size_t c = 0; c < 5; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < 17; ++r) sum += m(r, c);
    CHECK(std::abs(sum) < 1e-12);
  }
}

TEST_CASE("context stacking reproduces neighbours with edge replication") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t frames = 1 + rng.UniformInt(12), dims = 1 + rng.UniformInt(6);
    const int left = static_cast<int>(rng.UniformInt(4)),
              right = static_cast<int>(rng.UniformInt(4));
    const Matrix m = test::RandomMatrix(rng, frames, dims);
    const Matrix s = StackContext(m, left, right);
    REQUIRE(s.rows() == frames);
    REQUIRE(s.cols() == dims * static_cast<std::size_t>(left + right + 1));
    for (std::size_t t = 0; t < frames; ++t) {
      for (int o = -left; o <= right; ++o) {
        const long src =
            std::clamp<long>(static_cast<long>(t) + o, 0, static_cast<long>(frames) - 1);
        for (std::size_t d = 0; d < dims; ++d) {
          CHECK(s(t, static_cast<std::size_t>(o + left) * dims + d) == m(src, d));
        }
      }
    }
  }
}

TEST_CASE("serial and parallel feature extraction agree exactly") {
  Rng rng(6);
  std::vector<AudioBuffer> audio;
  for (int i = 0; i < 9; ++i) audio.push_back(Tones(rng, 1000 + rng.UniformInt(9000)));
  const FeatureConfig c;
  const auto a = ComputeFeaturesSerial(audio, c), b = ComputeFeaturesParallel(audio, c);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].values.values().size() == b[i].values.values().size());
    CHECK(std::equal(a[i].values.values().begin(), a[i].values.values().end(),
                     b[i].values.values().begin()));
  }
}

TEST_CASE("feature dump round trip") {
  test::TempDir dir("features");
  Rng rng(7);
  const FeatureMatrix f = ComputeFeatures(Tones(rng, 5000), FeatureConfig{});
  WriteFeatureDump(f, dir / "f.bin");
  const std::string bytes = test::ReadFile(dir / "f.bin");
  REQUIRE(bytes.size() == 16 + 4 * f.frames() * f.dims());
  CHECK(bytes.substr(0, 4) == "KWSF");
  const FeatureMatrix g = ReadFeatureDump(dir / "f.bin");
  REQUIRE(g.frames() == f.frames());
  REQUIRE(g.dims() == f.dims());
  for (std::size_t i = 0; i < f.values.values().size(); ++i) {
    CHECK(g.values.values()[i] == static_cast<double>(static_cast<float>(f.values.values()[i])));
  }
  test::WriteFile(dir / "bad.bin", "XXXX0000000000000000");
  CHECK_THROWS_AS(ReadFeatureDump(dir / "bad.bin"), KwsError);
  test::WriteFile(dir / "short.bin", bytes.substr(0, 40));
  CHECK_THROWS_AS(ReadFeatureDump(dir / "short.bin"), KwsError);
}

}  // namespace kws
