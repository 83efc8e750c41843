// src/train.cpp
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

#include "rawcnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "rawcnn/errors.hpp"
#include "rawcnn/rng.hpp"

namespace rawcnn {

template <typename S>
S logadd(std::span<const S> z) {
  if (z.empty()) throw std::invalid_argument("logadd: empty input");
  const S m = *std::max_element(z.begin(), z.end());
  if (std::isinf(m)) return m;
  S sum{0};
  for (S v : z) sum += std::exp(v - m);
  return m + std::log(sum);
}

template <typename S>
S frame_log_likelihood(std::span<const S> scores, int target, std::span<S> grad) {
  if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) {
    throw std::invalid_argument("frame_log_likelihood: target " +
                                std::to_string(target) + " outside [0, " +
                                std::to_string(scores.size()) + ")");
  }
  const S lse = logadd(scores);
  if (!grad.empty()) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      grad[i] = -std::exp(scores[i] - lse);
    }
    grad[static_cast<std::size_t>(target)] += S{1};
  }
  return scores[static_cast<std::size_t>(target)] - lse;
}

template <typename S>
void zero_params(NetworkParams<S>& params) {
  params.for_each_tensor([](const std::string&, std::vector<std::size_t>,
                            std::span<S> v) { std::fill(v.begin(), v.end(), S{0}); });
}

template <typename S>
void sgd_step(NetworkParams<S>& params, const NetworkParams<S>& grads, S lr) {
  if (!(params.config == grads.config)) {
    throw std::invalid_argument("sgd_step: gradient shape mismatch");
  }
  std::vector<std::pair<std::string, std::span<const S>>> g;
  grads.for_each_tensor([&](const std::string& name, std::vector<std::size_t>,
                            std::span<const S> v) { g.emplace_back(name, v); });
  for (const auto& [name, v] : g) {
    for (S x : v) {
      if (!std::isfinite(x)) {
        throw DivergenceError("non-finite gradient in " + name);
      }
    }
  }
  if (lr == S{0}) return;
  std::size_t i = 0;
  params.for_each_tensor([&](const std::string&, std::vector<std::size_t>,
                             std::span<S> v) {
    const auto& src = g[i++].second;
    S* dst = v.data();
    const S* gs = src.data();
    const std::size_t n = v.size();
#pragma omp simd
    for (std::size_t k = 0; k < n; ++k) dst[k] += lr * gs[k];
  });
  ++params.version;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be a finite value >= 0");
  }
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
}

Matrix<float> compute_scores(const NetworkParams<float>& params,
                             const FrameMatrix& inputs) {
  const auto k = static_cast<std::size_t>(params.config.num_classes);
  Matrix<float> out(inputs.rows(), k);
  const auto frames = static_cast<std::int64_t>(inputs.rows());
#pragma omp parallel
  {
    ForwardCache<float> cache;
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < frames; ++t) {
      auto f = forward_pass<float>(inputs.row(static_cast<std::size_t>(t)), params, cache);
      std::copy(f.begin(), f.end(), out.row(static_cast<std::size_t>(t)).begin());
    }
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix<float>& scores) {
  std::vector<int> out(scores.rows());
  for (std::size_t t = 0; t < scores.rows(); ++t) {
    auto r = scores.row(t);
    out[t] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

DatasetMetrics evaluate_frames(const NetworkParams<float>& params,
                               const FrameDataset& data) {
  // Per-utterance partial sums, reduced in fixed order.
  std::vector<std::size_t> correct(data.size());
  std::vector<double> ll(data.size());
  for (std::size_t u = 0; u < data.size(); ++u) {
    const auto scores = compute_scores(params, data[u].inputs);
    const auto pred = argmax_rows(scores);
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
      ok += pred[t] == data[u].labels[t];
      sum += static_cast<double>(
          frame_log_likelihood<float>(scores.row(t), data[u].labels[t]));
    }
    correct[u] = ok;
    ll[u] = sum;
  }
  DatasetMetrics m;
  std::size_t ok = 0;
  double total_ll = 0.0;
  for (std::size_t u = 0; u < data.size(); ++u) {
    m.frames += data[u].labels.size();
    ok += correct[u];
    total_ll += ll[u];
  }
  if (m.frames > 0) {
    m.frame_accuracy = 100.0 * static_cast<double>(ok) / static_cast<double>(m.frames);
    m.log_likelihood = total_ll / static_cast<double>(m.frames);
  }
  return m;
}

namespace {

void check_dataset(const FrameDataset& data, const NetworkConfig& config,
                   const char* name) {
  const auto width = static_cast<std::size_t>(config.input_window) *
                     static_cast<std::size_t>(config.input_dim);
  std::size_t frames = 0;
  for (const auto& u : data) {
    if (u.inputs.rows() != u.labels.size()) {
      throw DataError(std::string(name) + " utterance " + u.id +
                      ": frame/label count mismatch");
    }
    if (u.inputs.rows() > 0 && u.inputs.cols() != width) {
      throw ShapeError(std::string(name) + " utterance " + u.id + ": input width " +
                       std::to_string(u.inputs.cols()) + " != network input " +
                       std::to_string(width));
    }
    for (int l : u.labels) {
      if (l < 0 || l >= config.num_classes) {
        throw DataError(std::string(name) + " utterance " + u.id + ": label " +
                        std::to_string(l) + " outside [0, " +
                        std::to_string(config.num_classes) + ")");
      }
    }
    frames += u.labels.size();
  }
  if (frames == 0) throw DataError(std::string(name) + " set has no frames");
}

}  // namespace

TrainResult train_network(const FrameDataset& train, const FrameDataset& cv,
                          const NetworkConfig& config, const TrainConfig& tc,
                          const NetworkParams<float>* init) {
  tc.validate();
  config.validate();
  check_dataset(train, config, "train");
  check_dataset(cv, config, "cv");

  NetworkParams<float> params =
      init ? *init : init_params<float>(config, mix_seed(tc.seed, 0));
  if (!(params.config == config)) {
    throw std::invalid_argument("train_network: initial parameters do not match config");
  }
  auto grads = NetworkParams<float>::zeros(config);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
  for (std::size_t u = 0; u < train.size(); ++u) {
    for (std::size_t t = 0; t < train[u].labels.size(); ++t) {
      order.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(t));
    }
  }
  Rng order_rng(mix_seed(tc.seed, 1));
  ForwardCache<float> cache;
  std::vector<float> grad_scores(static_cast<std::size_t>(config.num_classes));
  const auto lr = static_cast<float>(tc.learning_rate);

  TrainResult result;
  result.params = params;
  double best = -std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    if (tc.shuffle) order_rng.shuffle(order.begin(), order.end());
    double ll_sum = 0.0;
    for (std::size_t n = 0; n < order.size(); ++n) {
      const auto [u, t] = order[n];
      auto scores = forward_pass<float>(train[u].inputs.row(t), params, cache);
      const float ll = frame_log_likelihood<float>(scores, train[u].labels[t], grad_scores);
      if (!std::isfinite(ll)) {
        throw DivergenceError("non-finite log-likelihood at epoch " +
                              std::to_string(epoch) + ", frame " + std::to_string(n) +
                              " (utterance " + train[u].id + ")");
      }
      ll_sum += static_cast<double>(ll);
      zero_params(grads);
      backward_pass<float>(cache, params, grad_scores, grads);
      try {
        sgd_step(params, grads, lr);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at epoch " +
                              std::to_string(epoch) + ", frame " + std::to_string(n) +
                              " (utterance " + train[u].id + ")");
      }
    }
    const auto m = evaluate_frames(params, cv);
    EpochStats st;
    st.epoch = epoch;
    st.train_log_likelihood = ll_sum / static_cast<double>(order.size());
    st.cv_frame_accuracy = m.frame_accuracy;
    st.cv_log_likelihood = m.log_likelihood;
    result.history.push_back(st);

    const double score = tc.selection == SelectionMetric::kFrameAccuracy
                             ? m.frame_accuracy
                             : m.log_likelihood;
    if (score > best) {
      best = score;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= tc.patience) {
      break;
    }
  }
  return result;
}

// --- grid search ---------------------------------------------------------------

GridSpec GridSpec::table_defaults(int num_stages) {
  GridSpec g;
  g.window_ms = {100, 250, 400, 550, 700};
  g.kernel_widths.assign(static_cast<std::size_t>(num_stages), {1, 3, 5, 7, 9});
  g.filters = {10, 50, 90};
  g.hidden_units = {100, 500, 1000, 1500};
  g.pool_widths = {1, 3};
  return g;
}

std::size_t GridSpec::product_size() const {
  std::size_t n = window_ms.size() * filters.size() * hidden_units.size() *
                  pool_widths.size();
  for (const auto& k : kernel_widths) n *= k.size();
  return n;
}

void GridSpec::validate() const {
  auto nonempty = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("grid: empty ") + what + " list");
  };
  nonempty(!window_ms.empty(), "window");
  nonempty(!filters.empty(), "filters");
  nonempty(!hidden_units.empty(), "hidden units");
  nonempty(!pool_widths.empty(), "pool width");
  for (const auto& k : kernel_widths) nonempty(!k.empty(), "kernel width");
  if (max_configs && *max_configs == 0) {
    throw std::invalid_argument("grid: max_configs must be positive");
  }
}

int window_frames(double ms, const FrontendConfig& frontend) {
  const double samples = ms * frontend.sample_rate / 1000.0;
  if (frontend.input_kind == "feat") {
    return std::max(1, static_cast<int>(std::llround(samples / frontend.hop_samples)));
  }
  return std::max(1, static_cast<int>(std::llround(samples)));
}

std::vector<GridCandidate> enumerate_grid(const GridSpec& grid,
                                          const NetworkConfig& base,
                                          const FrontendConfig& frontend,
                                          std::uint64_t seed) {
  grid.validate();
  if (grid.kernel_widths.size() != base.stages.size()) {
    throw std::invalid_argument("grid: need one kernel width list per stage (" +
                                std::to_string(base.stages.size()) + ")");
  }
  // Mixed-radix digits, most significant first.
  std::vector<std::size_t> radix;
  radix.push_back(grid.window_ms.size());
  for (const auto& k : grid.kernel_widths) radix.push_back(k.size());
  radix.push_back(grid.filters.size());
  radix.push_back(grid.hidden_units.size());
  radix.push_back(grid.pool_widths.size());

  const std::size_t total = grid.product_size();
  std::vector<std::size_t> ordinals(total);
  std::iota(ordinals.begin(), ordinals.end(), std::size_t{0});
  if (grid.max_configs && *grid.max_configs < total) {
    Rng rng(mix_seed(seed, 0x9d1d));
    rng.shuffle(ordinals.begin(), ordinals.end());
    ordinals.resize(*grid.max_configs);
    std::sort(ordinals.begin(), ordinals.end());
  }

  std::vector<GridCandidate> out;
  for (std::size_t ord : ordinals) {
    std::vector<std::size_t> digit(radix.size());
    std::size_t rest = ord;
    for (std::size_t i = radix.size(); i-- > 0;) {
      digit[i] = rest % radix[i];
      rest /= radix[i];
    }
    GridCandidate c;
    c.ordinal = ord;
    c.window_ms = grid.window_ms[digit[0]];
    c.config = base;
    c.config.input_window = window_frames(c.window_ms, frontend);
    const std::size_t s_count = base.stages.size();
    for (std::size_t s = 0; s < s_count; ++s) {
      auto& st = c.config.stages[s];
      st.kernel_width = grid.kernel_widths[s][digit[1 + s]];
      st.filters = grid.filters[digit[1 + s_count]];
      st.pool_width = grid.pool_widths[digit[3 + s_count]];
    }
    c.config.hidden_units = grid.hidden_units[digit[2 + s_count]];
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<GridResult> grid_search(const std::vector<LabeledUtterance>& train,
                                    const std::vector<LabeledUtterance>& cv,
                                    const GridSpec& grid, const NetworkConfig& base,
                                    const FrontendConfig& frontend,
                                    std::optional<int> garbage,
                                    const TrainConfig& tc, bool parallel) {
  const auto candidates = enumerate_grid(grid, base, frontend, tc.seed);
  std::map<int, std::pair<FrameDataset, FrameDataset>> datasets;
  for (const auto& c : candidates) {
    const int w = c.config.input_window;
    if (!datasets.count(w)) {
      datasets.emplace(w, std::make_pair(make_dataset(train, frontend, w, garbage),
                                         make_dataset(cv, frontend, w, garbage)));
    }
  }

  std::vector<GridResult> results(candidates.size());
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& c = candidates[static_cast<std::size_t>(i)];
    GridResult& r = results[static_cast<std::size_t>(i)];
    r.candidate = c;
    try {
      c.config.validate();
      r.params = param_count(c.config);
      TrainConfig local = tc;
      local.seed = mix_seed(tc.seed, c.ordinal);
      const auto& [tr, va] = datasets.at(c.config.input_window);
      const auto res = train_network(tr, va, c.config, local);
      r.cv_accuracy = res.history.at(static_cast<std::size_t>(res.best_epoch - 1))
                          .cv_frame_accuracy;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const GridResult& a, const GridResult& b) {
                     if (a.error.has_value() != b.error.has_value()) return !a.error;
                     if (a.cv_accuracy != b.cv_accuracy) return a.cv_accuracy > b.cv_accuracy;
                     if (a.params != b.params) return a.params < b.params;
                     return a.candidate.ordinal < b.candidate.ordinal;
                   });
  return results;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

template <typename F>
std::string join_stages(const NetworkConfig& c, F get) {
  std::string s;
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(get(c.stages[i]));
  }
  return s;
}

}  // namespace

std::string history_csv(const std::vector<EpochStats>& history) {
  std::string out = "epoch,train_log_likelihood,cv_frame_accuracy\n";
  for (const auto& h : history) {
    out += std::to_string(h.epoch) + "," + fmt("%.6f", h.train_log_likelihood) + "," +
           fmt("%.4f", h.cv_frame_accuracy) + "\n";
  }
  return out;
}

std::string grid_csv(const std::vector<GridResult>& results) {
  std::string out =
      "rank,ordinal,window_ms,input_window,kernel_widths,shifts,filters,pool_widths,"
      "hidden_units,cv_accuracy,param_count,error\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto& c = r.candidate.config;
    std::string err = r.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += std::to_string(i + 1) + "," + std::to_string(r.candidate.ordinal) + "," +
           fmt("%g", r.candidate.window_ms) + "," + std::to_string(c.input_window) + "," +
           join_stages(c, [](const StageConfig& s) { return s.kernel_width; }) + "," +
           join_stages(c, [](const StageConfig& s) { return s.shift; }) + "," +
           join_stages(c, [](const StageConfig& s) { return s.filters; }) + "," +
           join_stages(c, [](const StageConfig& s) { return s.pool_width; }) + "," +
           std::to_string(c.hidden_units) + "," +
           (r.error ? std::string() : fmt("%.4f", r.cv_accuracy)) + "," +
           std::to_string(r.params) + "," + err + "\n";
  }
  return out;
}

template float logadd(std::span<const float>);
template double logadd(std::span<const double>);
template float frame_log_likelihood(std::span<const float>, int, std::span<float>);
template double frame_log_likelihood(std::span<const double>, int, std::span<double>);
template void sgd_step(NetworkParams<float>&, const NetworkParams<float>&, float);
template void sgd_step(NetworkParams<double>&, const NetworkParams<double>&, double);
template void zero_params(NetworkParams<float>&);
template void zero_params(NetworkParams<double>&);

}  // namespace rawcnn
