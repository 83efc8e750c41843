// include/rawcnn/nn.hpp
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

#ifndef RAWCNN_NN_HPP_
#define RAWCNN_NN_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rawcnn/layers.hpp"
#include "rawcnn/matrix.hpp"

namespace rawcnn {

/// One filter extraction stage: conv -> max-pool -> tanh.
struct StageConfig {
  int kernel_width = 1;
  int shift = 1;
  int filters = 1;
  int pool_width = 1;  // 1 = no pooling
  bool operator==(const StageConfig&) const = default;
};

struct NetworkConfig {
  int input_window = 1;  // frames fed to the first stage (samples, for raw input)
  int input_dim = 1;     // 1 for raw waveform, feature dimension otherwise
  std::vector<StageConfig> stages;
  int hidden_units = 100;
  int num_classes = 2;

  /// Throws ShapeError (naming the stage) or std::invalid_argument.
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

struct StageShape {
  std::size_t input_frames = 0;
  std::size_t conv_frames = 0;
  std::size_t pooled_frames = 0;
  int dim = 0;
};

std::vector<StageShape> stage_shapes(const NetworkConfig& config);
std::size_t flattened_size(const NetworkConfig& config);
std::int64_t param_count(const NetworkConfig& config);

template <typename S>
struct NetworkParams {
  NetworkConfig config;
  std::vector<ConvLayerParams<S>> stages;
  Matrix<S> hidden_weights;  // hidden_units x flattened_size
  std::vector<S> hidden_bias;
  Matrix<S> output_weights;  // num_classes x hidden_units
  std::vector<S> output_bias;
  // Bumped on every in-place update so stale forward caches are detected.
  std::uint64_t version = 0;

  static NetworkParams zeros(const NetworkConfig& config);

  /// Visits every tensor in serialization order as (name, shape, values).
  void for_each_tensor(
      const std::function<void(const std::string&, std::vector<std::size_t>,
                               std::span<S>)>& fn);
  void for_each_tensor(
      const std::function<void(const std::string&, std::vector<std::size_t>,
                               std::span<const S>)>& fn) const;

  std::size_t size() const;

  template <typename U>
  NetworkParams<U> cast() const {
    auto out = NetworkParams<U>::zeros(config);
    std::vector<std::span<U>> dst;
    out.for_each_tensor([&](const std::string&, std::vector<std::size_t>,
                            std::span<U> v) { dst.push_back(v); });
    std::size_t i = 0;
    for_each_tensor([&](const std::string&, std::vector<std::size_t>,
                        std::span<const S> v) {
      std::copy(v.begin(), v.end(), dst[i++].begin());
    });
    return out;
  }

  bool same_values(const NetworkParams& other) const;
};

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases of
/// each layer, drawn in serialization order from one seeded stream.
template <typename S>
NetworkParams<S> init_params(const NetworkConfig& config, std::uint64_t seed);

enum class Backend { kSerial, kParallel };

/// Activations retained by forward_pass for backward_pass.
template <typename S>
struct ForwardCache {
  Backend backend = Backend::kParallel;

  std::vector<Matrix<S>> stage_input;  // [0] = network input, [s+1] = tanh out
  std::vector<Matrix<S>> conv_out;
  std::vector<std::vector<std::uint32_t>> argmax;
  std::vector<S> hidden;  // tanh(W_h v + b_h)
  std::vector<S> scores;

  // Identity of the parameters the cache was computed with.
  const void* params_id = nullptr;
  std::uint64_t params_version = 0;
  bool valid = false;

  // Scratch space for backward_pass.
  std::vector<S> grad_hidden;
  std::vector<S> grad_flat;
  Matrix<S> grad_act;
  Matrix<S> grad_pooled;
  Matrix<S> grad_conv;
  Matrix<S> grad_prev;
};

/// Runs all stages on one input window (input_window x input_dim values,
/// frame-major) and returns the K output scores f (a view into the cache).
template <typename S>
std::span<const S> forward_pass(std::span<const S> window,
                                const NetworkParams<S>& params,
                                ForwardCache<S>& cache);

template <typename S>
std::span<const S> forward_pass(const Matrix<S>& window,
                                const NetworkParams<S>& params,
                                ForwardCache<S>& cache) {
  if (window.cols() != static_cast<std::size_t>(params.config.input_dim) ||
      window.rows() != static_cast<std::size_t>(params.config.input_window)) {
    throw ShapeError("forward_pass: input window is " +
                     std::to_string(window.rows()) + "x" +
                     std::to_string(window.cols()) + ", network expects " +
                     std::to_string(params.config.input_window) + "x" +
                     std::to_string(params.config.input_dim));
  }
  return forward_pass(window.values(), params, cache);
}

/// Accumulates d(loss)/d(theta) into `grads` given d(loss)/d(scores).
/// grad_input, when non-null, receives d(loss)/d(input window).
template <typename S>
void backward_pass(ForwardCache<S>& cache, const NetworkParams<S>& params,
                   std::span<const S> grad_scores, NetworkParams<S>& grads,
                   Matrix<S>* grad_input = nullptr);

// Single-layer entry points with value semantics.
template <typename S>
Matrix<S> conv_forward(const Matrix<S>& x, const ConvLayerParams<S>& p) {
  Matrix<S> out;
  parallel::conv_forward(x, p, out);
  return out;
}

template <typename S>
Matrix<S> maxpool_forward(const Matrix<S>& x, int pool_width) {
  Matrix<S> out;
  std::vector<std::uint32_t> argmax;
  parallel::maxpool_forward(x, pool_width, out, argmax);
  return out;
}

/// Max-subtracted softmax.
template <typename S>
std::vector<S> softmax(std::span<const S> scores);

template <typename S>
std::vector<S> softmax(const std::vector<S>& scores) {
  return softmax(std::span<const S>(scores));
}

}  // namespace rawcnn

#endif  // RAWCNN_NN_HPP_
