// bench/bench_kernels.cpp
// Copyright 2026 The rawcnn Authors
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

// Serial reference kernels against their OpenMP versions, at the layer
// sizes of the default network and of the large raw-waveform configuration.

#include <benchmark/benchmark.h>

#include "rawcnn/layers.hpp"
#include "rawcnn/rng.hpp"

namespace {

using rawcnn::ConvLayerParams;
using rawcnn::Matrix;

struct ConvCase {
  Matrix<float> x;
  ConvLayerParams<float> p;
};

// Arguments: input frames, input dim, kernel width, shift, filters.
ConvCase make_case(const benchmark::State& state) {
  rawcnn::Rng rng(1);
  ConvCase c;
  c.x = Matrix<float>(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto& v : c.x.values()) v = static_cast<float>(rng.normal());
  c.p = ConvLayerParams<float>(static_cast<int>(state.range(2)), static_cast<int>(state.range(3)),
                               static_cast<int>(state.range(1)), static_cast<int>(state.range(4)));
  for (auto& v : c.p.weights.values()) v = static_cast<float>(0.1 * rng.normal());
  return c;
}

void conv_args(benchmark::internal::Benchmark* b) {
  b->Args({800, 1, 64, 4, 30});     // default network, first stage
  b->Args({184, 30, 5, 1, 30});     // default network, second stage
  b->Args({4320, 1, 10, 10, 90});   // large network, first stage
  b->Args({144, 90, 5, 1, 90});     // large network, second stage
}

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  auto c = make_case(state);
  Matrix<float> out;
  for (auto _ : state) {
    if constexpr (Parallel) {
      rawcnn::parallel::conv_forward(c.x, c.p, out);
    } else {
      rawcnn::serial::conv_forward(c.x, c.p, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  auto c = make_case(state);
  Matrix<float> out;
  rawcnn::serial::conv_forward(c.x, c.p, out);
  ConvLayerParams<float> grad(c.p.kernel_width, c.p.shift, c.p.input_dim, c.p.output_dim);
  Matrix<float> gx;
  for (auto _ : state) {
    if constexpr (Parallel) {
      rawcnn::parallel::conv_backward(c.x, c.p, out, grad, &gx);
    } else {
      rawcnn::serial::conv_backward(c.x, c.p, out, grad, &gx);
    }
    benchmark::DoNotOptimize(gx.data());
  }
}

template <bool Parallel>
void BM_Dense(benchmark::State& state) {
  rawcnn::Rng rng(2);
  Matrix<float> w(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto& v : w.values()) v = static_cast<float>(rng.normal());
  std::vector<float> b(w.rows()), x(w.cols()), y(w.rows());
  for (auto& v : x) v = static_cast<float>(rng.normal());
  for (auto _ : state) {
    if constexpr (Parallel) {
      rawcnn::parallel::dense_forward<float>(w, b, x, y);
    } else {
      rawcnn::serial::dense_forward<float>(w, b, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_MaxPool(benchmark::State& state) {
  rawcnn::Rng rng(3);
  Matrix<float> x(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto& v : x.values()) v = static_cast<float>(rng.normal());
  Matrix<float> out;
  std::vector<std::uint32_t> argmax;
  for (auto _ : state) {
    if constexpr (Parallel) {
      rawcnn::parallel::maxpool_forward(x, 3, out, argmax);
    } else {
      rawcnn::serial::maxpool_forward(x, 3, out, argmax);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/serial")->Apply(conv_args);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/parallel")->Apply(conv_args);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/serial")->Apply(conv_args);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/parallel")->Apply(conv_args);
BENCHMARK(BM_Dense<false>)->Name("dense_forward/serial")->Args({100, 270})->Args({500, 1080});
BENCHMARK(BM_Dense<true>)->Name("dense_forward/parallel")->Args({100, 270})->Args({500, 1080});
BENCHMARK(BM_MaxPool<false>)->Name("maxpool_forward/serial")->Args({432, 90})->Args({184, 30});
BENCHMARK(BM_MaxPool<true>)->Name("maxpool_forward/parallel")->Args({432, 90})->Args({184, 30});

BENCHMARK_MAIN();
