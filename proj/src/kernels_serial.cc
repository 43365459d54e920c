// src/kernels_serial.cc

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

#include <string>

#include "kws/error.h"
#include "kws/kernels.h"

namespace kws::kernels::serial {

void MatMul(const Matrix &a, const Matrix &b, Matrix &c) {
  Require(a.cols() == b.rows(), ErrorKind::kDimensionMismatch, "MatMul: inner dimensions differ");
  c.Resize(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
}

void MatMulTransA(const Matrix &a, const Matrix &b, Matrix &c) {
  Require(a.rows() == b.rows(), ErrorKind::kDimensionMismatch, "MatMulTransA: row counts differ");
  c.Resize(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
      c(i, j) = acc;
    }
}

void MatMulTransB(const Matrix &a, const Matrix &b, Matrix &c) {
  Require(a.cols() == b.cols(), ErrorKind::kDimensionMismatch,
          "MatMulTransB: column counts differ");
  c.Resize(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
      c(i, j) = acc;
    }
}

void ConvolveDirect(std::span<const double> x, std::span<const double> h, std::span<double> y) {
  Require(!x.empty() && !h.empty() && y.size() == x.size() + h.size() - 1,
          ErrorKind::kDimensionMismatch, "ConvolveDirect: bad output length");
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t k = 0; k < h.size(); ++k) y[i + k] += x[i] * h[k];
}

}  // namespace kws::kernels::serial
