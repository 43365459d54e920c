// include/kws/fft.h

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

#ifndef KWS_FFT_H_
#define KWS_FFT_H_

#include <complex>
#include <span>
#include <vector>

namespace kws {

/// Power spectrum of real frames, zero-padded to a fixed FFT size.
/// Thread-safe; each call uses its own scratch buffers.
class PowerSpectrum {
 public:
  explicit PowerSpectrum(std::size_t fft_size);
  std::size_t fft_size() const { return fft_size_; }
  std::size_t num_bins() const { return fft_size_ / 2 + 1; }
  /// out[k] = |X[k]|^2 for k in [0, fft_size/2]. frame.size() <= fft_size.
  void Compute(std::span<const double> frame, std::span<double> out) const;

 private:
  std::size_t fft_size_;
  void *plan_;
};

/// Full linear convolution through a zero-padded real FFT.
std::vector<double> ConvolveFft(std::span<const double> x, std::span<const double> h);

}  // namespace kws

#endif  // KWS_FFT_H_
