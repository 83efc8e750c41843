// src/diagnostics.cpp
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

#include "rawcnn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "rawcnn/errors.hpp"
#include "rawcnn/pipeline.hpp"

namespace rawcnn {

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

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

Matrix<double> filter_spectra(const ConvLayerParams<float>& layer, int n_fft) {
  if (layer.input_dim != 1) {
    throw std::invalid_argument("filter spectra need a first layer with input dimension 1, got " +
                                std::to_string(layer.input_dim));
  }
  if (n_fft < 2 || n_fft < layer.kernel_width) {
    throw std::invalid_argument("n_fft must be >= 2 and >= the kernel width (" +
                                std::to_string(layer.kernel_width) + ")");
  }
  const auto bins = static_cast<std::size_t>(n_fft / 2 + 1);
  const auto filters = static_cast<std::size_t>(layer.output_dim);
  const auto width = static_cast<std::size_t>(layer.kernel_width);
  Matrix<double> out(filters, bins);
  // Direct DFT; the filters are short, so O(kW * n_fft) per filter is cheap.
  for (std::size_t o = 0; o < filters; ++o) {
    for (std::size_t b = 0; b < bins; ++b) {
      double re = 0.0, im = 0.0;
      for (std::size_t n = 0; n < width; ++n) {
        // Reduce b*n mod n_fft first so the angle stays small and exact.
        const auto m = (b * n) % static_cast<std::size_t>(n_fft);
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / n_fft;
        const double w = layer.weights(o, n);
        re += w * std::cos(angle);
        im += w * std::sin(angle);
      }
      out(o, b) = std::hypot(re, im);
    }
  }
  return out;
}

std::string filter_spectra_csv(const Matrix<double>& spectra, int sample_rate,
                               int n_fft) {
  std::string out = "filter,bin,frequency_hz,magnitude\n";
  for (std::size_t o = 0; o < spectra.rows(); ++o) {
    for (std::size_t b = 0; b < spectra.cols(); ++b) {
      const double hz = static_cast<double>(b) * sample_rate / n_fft;
      out += std::to_string(o) + "," + std::to_string(b) + "," + fmt("%.4f", hz) + "," +
             fmt("%.9g", spectra(o, b)) + "\n";
    }
  }
  return out;
}

std::vector<int> spectral_peaks(const Matrix<double>& spectra) {
  std::vector<int> peaks;
  peaks.reserve(spectra.rows());
  for (std::size_t o = 0; o < spectra.rows(); ++o) {
    const auto row = spectra.row(o);
    peaks.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return peaks;
}

// --- gradient check ----------------------------------------------------------

bool GradCheckReport::passed() const {
  return std::all_of(tensors.begin(), tensors.end(),
                     [](const TensorCheck& t) { return t.passed; });
}

namespace {

struct Probe {
  double loss = 0.0;
  std::vector<std::vector<std::uint32_t>> argmax;
};

Probe probe(std::span<const double> window, const NetworkParams<double>& params,
            int target, ForwardCache<double>& cache) {
  const auto scores = forward_pass(window, params, cache);
  return {-frame_log_likelihood(scores, target), cache.argmax};
}

void record(TensorCheck& t, double analytic, double numeric, const GradCheckOptions& o) {
  const double abs_err = std::abs(analytic - numeric);
  const double denom = std::max({std::abs(analytic), std::abs(numeric), o.floor});
  const double rel = abs_err == 0.0 ? 0.0 : abs_err / denom;
  ++t.checked;
  t.max_abs_error = std::max(t.max_abs_error, abs_err);
  t.max_rel_error = std::max(t.max_rel_error, rel);
  if (!(rel < o.tolerance)) t.passed = false;
}

}  // namespace

GradCheckReport check_gradients(const NetworkParams<double>& params,
                                std::span<const double> window, int target,
                                const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const auto k = params.config.num_classes;
  if (target < 0 || target >= k) {
    throw std::invalid_argument("target " + std::to_string(target) + " out of range");
  }
  ForwardCache<double> cache;
  cache.backend = Backend::kSerial;
  const auto base = probe(window, params, target, cache);

  // Analytic gradient of the negative log-likelihood.
  std::vector<double> grad_scores(static_cast<std::size_t>(k));
  {
    const auto scores = forward_pass(window, params, cache);
    const auto p = softmax<double>(scores);
    for (int i = 0; i < k; ++i) {
      grad_scores[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)] - (i == target ? 1.0 : 0.0);
    }
  }
  auto grads = NetworkParams<double>::zeros(params.config);
  Matrix<double> grad_input;
  backward_pass<double>(cache, params, grad_scores, grads, &grad_input);

  std::vector<std::string> names;
  std::vector<std::span<double>> analytic;
  grads.for_each_tensor([&](const std::string& name, std::vector<std::size_t>,
                            std::span<double> v) {
    names.push_back(name);
    analytic.push_back(v);
  });
  if (options.corrupt_tensor) {
    auto it = std::find(names.begin(), names.end(), *options.corrupt_tensor);
    if (it == names.end()) {
      throw std::invalid_argument("unknown tensor '" + *options.corrupt_tensor + "'");
    }
    auto& g = analytic[static_cast<std::size_t>(it - names.begin())];
    g[0] += 0.01 + 0.5 * std::abs(g[0]);
  }

  auto work = params;
  std::vector<std::span<double>> values;
  work.for_each_tensor([&](const std::string&, std::vector<std::size_t>,
                           std::span<double> v) { values.push_back(v); });

  const double eps = options.epsilon;
  GradCheckReport report;
  for (std::size_t ti = 0; ti < values.size(); ++ti) {
    TensorCheck t;
    t.name = names[ti];
    for (std::size_t i = 0; i < values[ti].size(); ++i) {
      const double saved = values[ti][i];
      values[ti][i] = saved + eps;
      const auto plus = probe(window, work, target, cache);
      values[ti][i] = saved - eps;
      const auto minus = probe(window, work, target, cache);
      values[ti][i] = saved;
      if (plus.argmax != base.argmax || minus.argmax != base.argmax) {
        ++t.skipped;
        continue;
      }
      record(t, analytic[ti][i], (plus.loss - minus.loss) / (2.0 * eps), options);
    }
    report.tensors.push_back(std::move(t));
  }

  if (options.check_input) {
    TensorCheck t;
    t.name = "input";
    std::vector<double> x(window.begin(), window.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + eps;
      const auto plus = probe(x, params, target, cache);
      x[i] = saved - eps;
      const auto minus = probe(x, params, target, cache);
      x[i] = saved;
      if (plus.argmax != base.argmax || minus.argmax != base.argmax) {
        ++t.skipped;
        continue;
      }
      record(t, grad_input.data()[i], (plus.loss - minus.loss) / (2.0 * eps), options);
    }
    report.tensors.push_back(std::move(t));
  }
  return report;
}

NetworkConfig random_small_config(Rng& rng) {
  for (;;) {
    NetworkConfig c;
    c.input_dim = 1;
    const int num_stages = 1 + static_cast<int>(rng.index(3));
    for (int s = 0; s < num_stages; ++s) {
      StageConfig st;
      st.kernel_width = 1 + static_cast<int>(rng.index(5));
      st.shift = 1 + static_cast<int>(rng.index(3));
      st.filters = 1 + static_cast<int>(rng.index(8));
      st.pool_width = 1 + static_cast<int>(rng.index(3));
      c.stages.push_back(st);
    }
    c.hidden_units = 1 + static_cast<int>(rng.index(8));
    c.num_classes = 2 + static_cast<int>(rng.index(4));
    // Smallest window that leaves one frame after the last stage.
    long need = 1;
    for (auto it = c.stages.rbegin(); it != c.stages.rend(); ++it) {
      need = (need * it->pool_width - 1) * it->shift + it->kernel_width;
    }
    if (need > 64) continue;
    c.input_window = static_cast<int>(need + static_cast<long>(rng.index(static_cast<std::size_t>(65 - need))));
    return c;
  }
}

std::string grad_check_csv(const GradCheckReport& report) {
  std::string out = "tensor,checked,skipped,max_rel_error,max_abs_error,status\n";
  for (const auto& t : report.tensors) {
    out += t.name + "," + std::to_string(t.checked) + "," + std::to_string(t.skipped) + "," +
           fmt("%.3e", t.max_rel_error) + "," + fmt("%.3e", t.max_abs_error) + "," +
           (t.passed ? "pass" : "FAIL") + "\n";
  }
  return out;
}

// --- pooling ablation --------------------------------------------------------

NetworkConfig ablation_config(const NetworkConfig& base, int pools) {
  if (base.stages.size() != 3) {
    throw std::invalid_argument("pooling ablation needs a 3-stage base config, got " +
                                std::to_string(base.stages.size()) + " stages");
  }
  if (pools < 0 || pools > 3) {
    throw std::invalid_argument("number of pooling layers must be in 0..3");
  }
  NetworkConfig c = base;
  for (int s = pools; s < 3; ++s) c.stages[static_cast<std::size_t>(s)].pool_width = 1;
  c.validate();
  return c;
}

std::vector<AblationRow> ablate_pooling(const AblationData& data,
                                        const NetworkConfig& base,
                                        const TrainConfig& tc, int hmm_states) {
  if (!data.train || !data.cv || !data.test || !data.test_refs) {
    throw std::invalid_argument("ablate_pooling: missing dataset");
  }
  std::vector<AblationRow> rows;
  for (int p = 0; p <= 3; ++p) {
    AblationRow row;
    row.pools = p;
    row.config = base;
    try {
      row.config = ablation_config(base, p);
      row.params = param_count(row.config);
      const auto result = train_network(*data.train, *data.cv, row.config, tc);
      row.cv_frame_accuracy = result.best_epoch > 0
                                  ? result.history[static_cast<std::size_t>(result.best_epoch - 1)].cv_frame_accuracy
                                  : 0.0;
      const auto k = static_cast<std::size_t>(row.config.num_classes);
      const Matrix<float> no_transitions(k, k, 0.0f);
      row.test_accuracy = score_decoder(result.params, no_transitions, *data.test,
                                        *data.test_refs, Decoder::kHmm, hmm_states)
                              .accuracy();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "pooling_layers,input_window,kernel_widths,shifts,filters,pool_widths,"
      "param_count,cv_frame_accuracy,test_accuracy,error\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    out += std::to_string(r.pools) + "," + std::to_string(c.input_window) + "," +
           join_stages(c, [](const StageConfig& s) { return s.kernel_width; }) + "," +
           join_stages(c, [](const StageConfig& s) { return s.shift; }) + "," +
           join_stages(c, [](const StageConfig& s) { return s.filters; }) + "," +
           join_stages(c, [](const StageConfig& s) { return s.pool_width; }) + "," +
           (r.params > 0 ? std::to_string(r.params) : std::string()) + "," +
           (r.error ? std::string() : fmt("%.4f", r.cv_frame_accuracy)) + "," +
           (r.error ? std::string() : fmt("%.4f", r.test_accuracy)) + "," +
           csv_safe(r.error.value_or("")) + "\n";
  }
  return out;
}

}  // namespace rawcnn
