// include/kws/rng.h

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

#ifndef KWS_RNG_H_
#define KWS_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace kws {

/// 64-bit FNV-1a over raw bytes.
std::uint64_t Fnv1a64(std::string_view bytes);

/// Seed for a named sub-stream: FNV-1a of the tag XOR the parent seed.
std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view tag);

/// Seeded generator whose derived draws are platform independent. The
/// standard distributions are implementation-defined, so every draw here is
/// built directly from the mt19937_64 bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double Uniform();
  /// Uniform on [lo, hi]; returns lo exactly when lo == hi.
  double Uniform(double lo, double hi);
  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t UniformInt(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double Normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace kws

#endif  // KWS_RNG_H_
