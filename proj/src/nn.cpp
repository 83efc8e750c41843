// src/nn.cpp
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

#include "rawcnn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rawcnn/errors.hpp"
#include "rawcnn/rng.hpp"

namespace rawcnn {

void NetworkConfig::validate() const {
  if (input_window < 1) throw std::invalid_argument("input_window must be >= 1");
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (hidden_units < 1) throw std::invalid_argument("hidden_units must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto& st = stages[s];
    if (st.kernel_width < 1 || st.shift < 1 || st.filters < 1 ||
        st.pool_width < 1) {
      throw std::invalid_argument(
          "stage " + std::to_string(s) +
          ": kernel width, shift, filters and pool width must be >= 1");
    }
  }
  if (flattened_size(*this) == 0) {
    throw ShapeError("network has an empty classification input");
  }
}

std::vector<StageShape> stage_shapes(const NetworkConfig& config) {
  std::vector<StageShape> shapes;
  std::size_t frames = static_cast<std::size_t>(std::max(config.input_window, 0));
  int dim = config.input_dim;
  for (std::size_t s = 0; s < config.stages.size(); ++s) {
    const auto& st = config.stages[s];
    StageShape sh;
    sh.input_frames = frames;
    sh.conv_frames = conv_output_frames(frames, st.kernel_width, st.shift);
    if (sh.conv_frames == 0) {
      throw ShapeError("stage " + std::to_string(s) + ": " +
                       std::to_string(frames) + " input frames < kernel width " +
                       std::to_string(st.kernel_width));
    }
    if (sh.conv_frames < static_cast<std::size_t>(st.pool_width)) {
      throw ShapeError("stage " + std::to_string(s) + ": " +
                       std::to_string(sh.conv_frames) +
                       " conv frames < pool width " +
                       std::to_string(st.pool_width));
    }
    sh.pooled_frames = sh.conv_frames / static_cast<std::size_t>(st.pool_width);
    sh.dim = st.filters;
    shapes.push_back(sh);
    frames = sh.pooled_frames;
    dim = st.filters;
  }
  (void)dim;
  return shapes;
}

std::size_t flattened_size(const NetworkConfig& config) {
  const auto shapes = stage_shapes(config);
  if (shapes.empty()) {
    return static_cast<std::size_t>(config.input_window) *
           static_cast<std::size_t>(config.input_dim);
  }
  return shapes.back().pooled_frames * static_cast<std::size_t>(shapes.back().dim);
}

std::int64_t param_count(const NetworkConfig& config) {
  std::int64_t total = 0;
  std::int64_t d_in = config.input_dim;
  for (const auto& st : config.stages) {
    total += static_cast<std::int64_t>(st.kernel_width) * d_in * st.filters +
             st.filters;
    d_in = st.filters;
  }
  const auto flat = static_cast<std::int64_t>(flattened_size(config));
  const std::int64_t h = config.hidden_units;
  const std::int64_t k = config.num_classes;
  return total + flat * h + h + h * k + k;
}

template <typename S>
NetworkParams<S> NetworkParams<S>::zeros(const NetworkConfig& config) {
  config.validate();
  NetworkParams p;
  p.config = config;
  int d_in = config.input_dim;
  for (const auto& st : config.stages) {
    p.stages.emplace_back(st.kernel_width, st.shift, d_in, st.filters);
    d_in = st.filters;
  }
  const auto flat = flattened_size(config);
  const auto h = static_cast<std::size_t>(config.hidden_units);
  const auto k = static_cast<std::size_t>(config.num_classes);
  p.hidden_weights = Matrix<S>(h, flat);
  p.hidden_bias.assign(h, S{0});
  p.output_weights = Matrix<S>(k, h);
  p.output_bias.assign(k, S{0});
  return p;
}

template <typename S>
void NetworkParams<S>::for_each_tensor(
    const std::function<void(const std::string&, std::vector<std::size_t>,
                             std::span<S>)>& fn) {
  for (std::size_t s = 0; s < stages.size(); ++s) {
    auto& st = stages[s];
    const std::string prefix = "stage" + std::to_string(s);
    fn(prefix + ".weight", {st.weights.rows(), st.weights.cols()},
       st.weights.values());
    fn(prefix + ".bias", {st.bias.size()}, st.bias);
  }
  fn("hidden.weight", {hidden_weights.rows(), hidden_weights.cols()},
     hidden_weights.values());
  fn("hidden.bias", {hidden_bias.size()}, hidden_bias);
  fn("output.weight", {output_weights.rows(), output_weights.cols()},
     output_weights.values());
  fn("output.bias", {output_bias.size()}, output_bias);
}

template <typename S>
void NetworkParams<S>::for_each_tensor(
    const std::function<void(const std::string&, std::vector<std::size_t>,
                             std::span<const S>)>& fn) const {
  const_cast<NetworkParams*>(this)->for_each_tensor(
      [&](const std::string& name, std::vector<std::size_t> shape,
          std::span<S> v) { fn(name, std::move(shape), v); });
}

template <typename S>
std::size_t NetworkParams<S>::size() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, std::vector<std::size_t>,
                      std::span<const S> v) { n += v.size(); });
  return n;
}

template <typename S>
bool NetworkParams<S>::same_values(const NetworkParams& other) const {
  if (!(config == other.config)) return false;
  std::vector<std::span<const S>> mine;
  for_each_tensor([&](const std::string&, std::vector<std::size_t>,
                      std::span<const S> v) { mine.push_back(v); });
  std::size_t i = 0;
  bool same = true;
  other.for_each_tensor([&](const std::string&, std::vector<std::size_t>,
                            std::span<const S> v) {
    const auto& a = mine[i++];
    same = same && a.size() == v.size() &&
           std::equal(a.begin(), a.end(), v.begin());
  });
  return same;
}

template <typename S>
NetworkParams<S> init_params(const NetworkConfig& config, std::uint64_t seed) {
  auto p = NetworkParams<S>::zeros(config);
  Rng rng(seed);
  auto fill = [&](std::span<S> v, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (S& x : v) x = static_cast<S>(rng.uniform(-bound, bound));
  };
  for (auto& st : p.stages) {
    fill(st.weights.values(), st.patch_size());
    fill(st.bias, st.patch_size());
  }
  fill(p.hidden_weights.values(), p.hidden_weights.cols());
  fill(p.hidden_bias, p.hidden_weights.cols());
  fill(p.output_weights.values(), p.output_weights.cols());
  fill(p.output_bias, p.output_weights.cols());
  return p;
}

namespace {

template <typename S>
void tanh_inplace(std::span<S> v) {
  for (S& x : v) x = std::tanh(x);
}

template <typename S>
void conv_fwd(Backend b, const Matrix<S>& x, const ConvLayerParams<S>& p,
              Matrix<S>& out) {
  if (b == Backend::kSerial) {
    serial::conv_forward(x, p, out);
  } else {
    parallel::conv_forward(x, p, out);
  }
}

template <typename S>
void conv_bwd(Backend b, const Matrix<S>& x, const ConvLayerParams<S>& p,
              const Matrix<S>& go, ConvLayerParams<S>& g, Matrix<S>* gx) {
  if (b == Backend::kSerial) {
    serial::conv_backward(x, p, go, g, gx);
  } else {
    parallel::conv_backward(x, p, go, g, gx);
  }
}

template <typename S>
void dense_fwd(Backend b, const Matrix<S>& w, std::span<const S> bias,
               std::span<const S> x, std::span<S> y) {
  if (b == Backend::kSerial) {
    serial::dense_forward(w, bias, x, y);
  } else {
    parallel::dense_forward(w, bias, x, y);
  }
}

template <typename S>
void dense_bwd(Backend b, const Matrix<S>& w, std::span<const S> x,
               std::span<const S> gy, Matrix<S>& gw, std::span<S> gb,
               std::span<S> gx) {
  if (b == Backend::kSerial) {
    serial::dense_backward(w, x, gy, gw, gb, gx);
  } else {
    parallel::dense_backward(w, x, gy, gw, gb, gx);
  }
}

}  // namespace

template <typename S>
std::span<const S> forward_pass(std::span<const S> window,
                                const NetworkParams<S>& params,
                                ForwardCache<S>& cache) {
  const auto& cfg = params.config;
  const auto rows = static_cast<std::size_t>(cfg.input_window);
  const auto cols = static_cast<std::size_t>(cfg.input_dim);
  if (window.size() != rows * cols) {
    throw ShapeError("forward_pass: input has " + std::to_string(window.size()) +
                     " values, network expects " + std::to_string(rows * cols));
  }
  const std::size_t num_stages = params.stages.size();
  cache.valid = false;
  cache.stage_input.resize(num_stages + 1);
  cache.conv_out.resize(num_stages);
  cache.argmax.resize(num_stages);

  cache.stage_input[0].resize(rows, cols);
  std::copy(window.begin(), window.end(), cache.stage_input[0].data());

  for (std::size_t s = 0; s < num_stages; ++s) {
    try {
      conv_fwd(cache.backend, cache.stage_input[s], params.stages[s],
               cache.conv_out[s]);
      parallel::maxpool_forward(cache.conv_out[s], cfg.stages[s].pool_width,
                                cache.stage_input[s + 1], cache.argmax[s]);
    } catch (const ShapeError& e) {
      throw ShapeError("stage " + std::to_string(s) + ": " + e.what());
    }
    tanh_inplace(cache.stage_input[s + 1].values());
  }

  std::span<const S> flat = cache.stage_input[num_stages].values();
  if (flat.size() != params.hidden_weights.cols()) {
    throw ShapeError("classification stage: flattened size " +
                     std::to_string(flat.size()) + " != " +
                     std::to_string(params.hidden_weights.cols()));
  }
  cache.hidden.resize(params.hidden_weights.rows());
  dense_fwd<S>(cache.backend, params.hidden_weights, params.hidden_bias, flat,
               cache.hidden);
  tanh_inplace<S>(cache.hidden);
  cache.scores.resize(params.output_weights.rows());
  dense_fwd<S>(cache.backend, params.output_weights, params.output_bias,
               cache.hidden, cache.scores);

  cache.params_id = &params;
  cache.params_version = params.version;
  cache.valid = true;
  return cache.scores;
}

template <typename S>
void backward_pass(ForwardCache<S>& cache, const NetworkParams<S>& params,
                   std::span<const S> grad_scores, NetworkParams<S>& grads,
                   Matrix<S>* grad_input) {
  if (!cache.valid || cache.params_id != &params ||
      cache.params_version != params.version) {
    throw InvariantError(
        "backward_pass: forward cache is stale or belongs to other parameters");
  }
  if (grad_scores.size() != cache.scores.size()) {
    throw InvariantError("backward_pass: score gradient has wrong length");
  }
  if (!(grads.config == params.config)) {
    throw InvariantError("backward_pass: gradient store shape mismatch");
  }
  const Backend be = cache.backend;
  const std::size_t num_stages = params.stages.size();

  cache.grad_hidden.resize(cache.hidden.size());
  dense_bwd<S>(be, params.output_weights, cache.hidden, grad_scores,
               grads.output_weights, grads.output_bias, cache.grad_hidden);
  for (std::size_t i = 0; i < cache.hidden.size(); ++i) {
    const S h = cache.hidden[i];
    cache.grad_hidden[i] *= S{1} - h * h;
  }

  std::span<const S> flat = cache.stage_input[num_stages].values();
  const bool need_flat_grad = num_stages > 0 || grad_input != nullptr;
  cache.grad_flat.resize(need_flat_grad ? flat.size() : 0);
  dense_bwd<S>(be, params.hidden_weights, flat, cache.grad_hidden,
               grads.hidden_weights, grads.hidden_bias, cache.grad_flat);

  if (num_stages == 0) {
    if (grad_input) {
      grad_input->resize(cache.stage_input[0].rows(), cache.stage_input[0].cols());
      std::copy(cache.grad_flat.begin(), cache.grad_flat.end(),
                grad_input->data());
    }
    return;
  }

  for (std::size_t si = num_stages; si-- > 0;) {
    const Matrix<S>& act = cache.stage_input[si + 1];
    cache.grad_pooled.resize(act.rows(), act.cols());
    const S* upstream =
        si + 1 == num_stages ? cache.grad_flat.data() : cache.grad_prev.data();
    for (std::size_t i = 0; i < act.size(); ++i) {
      const S y = act.data()[i];
      cache.grad_pooled.data()[i] = upstream[i] * (S{1} - y * y);
    }
    parallel::maxpool_backward(cache.grad_pooled, cache.argmax[si],
                               cache.conv_out[si].rows(), cache.grad_conv);
    const bool need_input = si > 0 || grad_input != nullptr;
    conv_bwd(be, cache.stage_input[si], params.stages[si], cache.grad_conv,
             grads.stages[si], need_input ? &cache.grad_prev : nullptr);
  }
  if (grad_input) *grad_input = cache.grad_prev;
}

template <typename S>
std::vector<S> softmax(std::span<const S> scores) {
  if (scores.empty()) throw std::invalid_argument("softmax: empty scores");
  const S m = *std::max_element(scores.begin(), scores.end());
  std::vector<S> p(scores.size());
  S sum{0};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - m);
    sum += p[i];
  }
  for (S& v : p) v /= sum;
  return p;
}

template struct NetworkParams<float>;
template struct NetworkParams<double>;
template NetworkParams<float> init_params<float>(const NetworkConfig&, std::uint64_t);
template NetworkParams<double> init_params<double>(const NetworkConfig&, std::uint64_t);
template std::span<const float> forward_pass(std::span<const float>,
                                             const NetworkParams<float>&,
                                             ForwardCache<float>&);
template std::span<const double> forward_pass(std::span<const double>,
                                              const NetworkParams<double>&,
                                              ForwardCache<double>&);
template void backward_pass(ForwardCache<float>&, const NetworkParams<float>&,
                            std::span<const float>, NetworkParams<float>&,
                            Matrix<float>*);
template void backward_pass(ForwardCache<double>&, const NetworkParams<double>&,
                            std::span<const double>, NetworkParams<double>&,
                            Matrix<double>*);
template std::vector<float> softmax(std::span<const float>);
template std::vector<double> softmax(std::span<const double>);

}  // namespace rawcnn
