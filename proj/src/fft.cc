// src/fft.cc

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

#include "kws/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "kws/error.h"

namespace kws {

namespace {

// FFTW's planner is not thread-safe, so plans are created once under a lock
// and kept for the life of the process. Executing a plan through the
// new-array interface is thread-safe. FFTW_ESTIMATE keeps plan selection
// (and therefore rounding) identical from run to run.
std::mutex plan_mutex;

enum class PlanKind { kForward, kInverse };

fftw_plan GetPlan(PlanKind kind, std::size_t n) {
  static std::map<std::pair<PlanKind, std::size_t>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(kind, n);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::vector<double> real(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  auto *cplx = reinterpret_cast<fftw_complex *>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = kind == PlanKind::kForward
                       ? fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), cplx, flags)
                       : fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real.data(), flags);
  if (plan == nullptr) Fail(ErrorKind::kNumerical, "FFTW failed to plan size " + std::to_string(n));
  plans.emplace(key, plan);
  return plan;
}

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

PowerSpectrum::PowerSpectrum(std::size_t fft_size) : fft_size_(fft_size) {
  Require(fft_size >= 2, ErrorKind::kInvalidArgument, "PowerSpectrum: fft size too small");
  plan_ = GetPlan(PlanKind::kForward, fft_size);
}

void PowerSpectrum::Compute(std::span<const double> frame, std::span<double> out) const {
  Require(frame.size() <= fft_size_ && out.size() == num_bins(), ErrorKind::kDimensionMismatch,
          "PowerSpectrum: bad buffer sizes");
  std::vector<double> in(fft_size_, 0.0);
  std::copy(frame.begin(), frame.end(), in.begin());
  std::vector<std::complex<double>> spec(num_bins());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), in.data(),
                       reinterpret_cast<fftw_complex *>(spec.data()));
  for (std::size_t k = 0; k < spec.size(); ++k) out[k] = std::norm(spec[k]);
}

std::vector<double> ConvolveFft(std::span<const double> x, std::span<const double> h) {
  Require(!x.empty() && !h.empty(), ErrorKind::kInvalidArgument, "ConvolveFft: empty operand");
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = NextPow2(out_len);
  fftw_plan forward = GetPlan(PlanKind::kForward, n);
  fftw_plan inverse = GetPlan(PlanKind::kInverse, n);

  std::vector<double> xa(n, 0.0), ha(n, 0.0);
  std::copy(x.begin(), x.end(), xa.begin());
  std::copy(h.begin(), h.end(), ha.begin());
  std::vector<std::complex<double>> xs(n / 2 + 1), hs(n / 2 + 1);
  fftw_execute_dft_r2c(forward, xa.data(), reinterpret_cast<fftw_complex *>(xs.data()));
  fftw_execute_dft_r2c(forward, ha.data(), reinterpret_cast<fftw_complex *>(hs.data()));
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] *= hs[k];
  fftw_execute_dft_c2r(inverse, reinterpret_cast<fftw_complex *>(xs.data()), xa.data());

  std::vector<double> y(out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out_len; ++i) y[i] = xa[i] * scale;
  return y;
}

}  // namespace kws
