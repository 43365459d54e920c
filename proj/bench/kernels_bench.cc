// bench/kernels_bench.cc

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

// Serial reference kernels against their OpenMP versions.
//
//   kws-bench --benchmark_filter=MatMul
//   OMP_NUM_THREADS=4 kws-bench

#include <benchmark/benchmark.h>

#include <vector>

#include "kws/audio.h"
#include "kws/features.h"
#include "kws/fft.h"
#include "kws/kernels.h"
#include "kws/matrix.h"
#include "kws/rng.h"

namespace {

kws::Matrix RandomMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  kws::Rng rng(seed);
  kws::Matrix m(rows, cols);
  for (double &v : m.values()) v = rng.Uniform(-1.0, 1.0);
  return m;
}

std::vector<double> RandomSignal(std::size_t n, std::uint64_t seed) {
  kws::Rng rng(seed);
  std::vector<double> x(n);
  for (double &v : x) v = rng.Uniform(-1.0, 1.0);
  return x;
}

// Shapes of a training batch: 256 frames x 140 inputs through 128 units.
template <void (*Kernel)(const kws::Matrix &, const kws::Matrix &, kws::Matrix &)>
void BM_MatMul(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const kws::Matrix a = RandomMatrix(n, 140, 1), b = RandomMatrix(140, 128, 2);
  kws::Matrix c;
  for (auto _ : state) {
    Kernel(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 140 * 128);
}
BENCHMARK(BM_MatMul<kws::kernels::serial::MatMul>)->Name("MatMul/serial")->Arg(256)->Arg(4096);
BENCHMARK(BM_MatMul<kws::kernels::omp::MatMul>)->Name("MatMul/omp")->Arg(256)->Arg(4096);

template <void (*Kernel)(const kws::Matrix &, const kws::Matrix &, kws::Matrix &)>
void BM_MatMulTransA(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const kws::Matrix a = RandomMatrix(n, 140, 1), b = RandomMatrix(n, 128, 2);
  kws::Matrix c;
  for (auto _ : state) {
    Kernel(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 140 * 128);
}
BENCHMARK(BM_MatMulTransA<kws::kernels::serial::MatMulTransA>)
    ->Name("MatMulTransA/serial")
    ->Arg(256);
BENCHMARK(BM_MatMulTransA<kws::kernels::omp::MatMulTransA>)->Name("MatMulTransA/omp")->Arg(256);

template <void (*Kernel)(std::span<const double>, std::span<const double>, std::span<double>)>
void BM_Convolve(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  const std::vector<double> x = RandomSignal(n, 3), h = RandomSignal(m, 4);
  std::vector<double> y(n + m - 1);
  for (auto _ : state) {
    Kernel(x, h, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Convolve<kws::kernels::serial::ConvolveDirect>)
    ->Name("ConvolveDirect/serial")
    ->Args({16000, 512});
BENCHMARK(BM_Convolve<kws::kernels::omp::ConvolveDirect>)
    ->Name("ConvolveDirect/omp")
    ->Args({16000, 512});

void BM_ConvolveFft(benchmark::State &state) {
  const std::vector<double> x = RandomSignal(state.range(0), 3),
                            h = RandomSignal(state.range(1), 4);
  for (auto _ : state) benchmark::DoNotOptimize(kws::ConvolveFft(x, h));
}
BENCHMARK(BM_ConvolveFft)->Args({16000, 512})->Args({160000, 9600});

template <bool kParallel>
void BM_Features(benchmark::State &state) {
  std::vector<kws::AudioBuffer> audio;
  for (int i = 0; i < 64; ++i) audio.emplace_back(RandomSignal(16000, 10 + i), 16000);
  const kws::FeatureConfig config;
  for (auto _ : state) {
    auto f = kParallel ? kws::ComputeFeaturesParallel(audio, config)
                       : kws::ComputeFeaturesSerial(audio, config);
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(BM_Features<false>)->Name("Features/serial");
BENCHMARK(BM_Features<true>)->Name("Features/omp");

}  // namespace

BENCHMARK_MAIN();
