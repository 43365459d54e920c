// include/kws/kernels.h

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

#ifndef KWS_KERNELS_H_
#define KWS_KERNELS_H_

// Dense inner loops used by training, feature extraction and reverberation.
// kernels::serial holds straightforward reference versions; kernels::omp
// holds the blocked, OpenMP-parallel versions used on the hot path. The omp
// kernels partition work by output row only, so every output element is
// accumulated in the same order no matter how many threads run. Results are
// therefore bit-identical across thread counts.

#include <span>

#include "kws/matrix.h"

namespace kws::kernels {

namespace serial {

/// c = a * b. c is resized.
void MatMul(const Matrix &a, const Matrix &b, Matrix &c);
/// c = a^T * b.
void MatMulTransA(const Matrix &a, const Matrix &b, Matrix &c);
/// c = a * b^T.
void MatMulTransB(const Matrix &a, const Matrix &b, Matrix &c);
/// Full linear convolution; y.size() must be x.size() + h.size() - 1.
void ConvolveDirect(std::span<const double> x, std::span<const double> h, std::span<double> y);

}  // namespace serial

namespace omp {

void MatMul(const Matrix &a, const Matrix &b, Matrix &c);
void MatMulTransA(const Matrix &a, const Matrix &b, Matrix &c);
void MatMulTransB(const Matrix &a, const Matrix &b, Matrix &c);
void ConvolveDirect(std::span<const double> x, std::span<const double> h, std::span<double> y);

}  // namespace omp

}  // namespace kws::kernels

#endif  // KWS_KERNELS_H_
