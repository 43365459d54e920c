// src/kernels_omp.cc

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

#include <algorithm>
#include <cstddef>

#include "kws/error.h"
#include "kws/kernels.h"

namespace kws::kernels::omp {

namespace {

constexpr std::ptrdiff_t kRowBlock = 4;

// rows [i0, i0 + rows) of c = (row source) * b, where row r of the left
// operand is read through `left(r, k)`. Accumulation runs over k in order.
template <typename Left>
inline void AccumulateRows(std::ptrdiff_t i0, std::ptrdiff_t rows, std::ptrdiff_t inner, Left left,
                           const Matrix &b, Matrix &c) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(b.cols());
  if (rows == kRowBlock) {
    double *c0 = c.Row(i0).data(), *c1 = c.Row(i0 + 1).data();
    double *c2 = c.Row(i0 + 2).data(), *c3 = c.Row(i0 + 3).data();
    for (std::ptrdiff_t k = 0; k < inner; ++k) {
      const double a0 = left(i0, k), a1 = left(i0 + 1, k);
      const double a2 = left(i0 + 2, k), a3 = left(i0 + 3, k);
      const double *brow = b.Row(k).data();
      for (std::ptrdiff_t j = 0; j < n; ++j) {
        const double bv = brow[j];
        c0[j] += a0 * bv;
        c1[j] += a1 * bv;
        c2[j] += a2 * bv;
        c3[j] += a3 * bv;
      }
    }
    return;
  }
  for (std::ptrdiff_t r = i0; r < i0 + rows; ++r) {
    double *crow = c.Row(r).data();
    for (std::ptrdiff_t k = 0; k < inner; ++k) {
      const double av = left(r, k);
      const double *brow = b.Row(k).data();
      for (std::ptrdiff_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

void MatMul(const Matrix &a, const Matrix &b, Matrix &c) {
  Require(a.cols() == b.rows(), ErrorKind::kDimensionMismatch, "MatMul: inner dimensions differ");
  c.Resize(a.rows(), b.cols());
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
  const auto inner = static_cast<std::ptrdiff_t>(a.cols());
  auto left = [&a](std::ptrdiff_t r, std::ptrdiff_t k) { return a(r, k); };
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i0 = 0; i0 < m; i0 += kRowBlock)
    AccumulateRows(i0, std::min(kRowBlock, m - i0), inner, left, b, c);
}

void MatMulTransA(const Matrix &a, const Matrix &b, Matrix &c) {
  Require(a.rows() == b.rows(), ErrorKind::kDimensionMismatch, "MatMulTransA: row counts differ");
  c.Resize(a.cols(), b.cols());
  const auto m = static_cast<std::ptrdiff_t>(a.cols());
  const auto inner = static_cast<std::ptrdiff_t>(a.rows());
  auto left = [&a](std::ptrdiff_t r, std::ptrdiff_t k) { return a(k, r); };
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i0 = 0; i0 < m; i0 += kRowBlock)
    AccumulateRows(i0, std::min(kRowBlock, m - i0), inner, left, b, c);
}

void MatMulTransB(const Matrix &a, const Matrix &b, Matrix &c) {
  Require(a.cols() == b.cols(), ErrorKind::kDimensionMismatch,
          "MatMulTransB: column counts differ");
  Matrix bt(b.cols(), b.rows());
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t k = 0; k < b.cols(); ++k) bt(k, r) = b(r, k);
  MatMul(a, bt, c);
}

void ConvolveDirect(std::span<const double> x, std::span<const double> h, std::span<double> y) {
  Require(!x.empty() && !h.empty() && y.size() == x.size() + h.size() - 1,
          ErrorKind::kDimensionMismatch, "ConvolveDirect: bad output length");
  const auto nx = static_cast<std::ptrdiff_t>(x.size());
  const auto nh = static_cast<std::ptrdiff_t>(h.size());
  const auto ny = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < ny; ++n) {
    const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, n - nx + 1);
    const std::ptrdiff_t k_hi = std::min(n, nh - 1);
    double acc = 0.0;
    for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) acc += h[k] * x[n - k];
    y[n] = acc;
  }
}

}  // namespace kws::kernels::omp
