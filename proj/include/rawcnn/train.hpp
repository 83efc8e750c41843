// include/rawcnn/train.hpp
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

#ifndef RAWCNN_TRAIN_HPP_
#define RAWCNN_TRAIN_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rawcnn/data.hpp"
#include "rawcnn/nn.hpp"

namespace rawcnn {

/// log(sum_i exp(z_i)), evaluated as max(z) + log(sum_i exp(z_i - max(z))).
template <typename S>
S logadd(std::span<const S> z);

template <typename S>
S logadd(const std::vector<S>& z) {
  return logadd(std::span<const S>(z));
}

/// f[target] - logadd(f). When `grad` is non-empty it receives the gradient
/// with respect to f: one_hot(target) - softmax(f).
template <typename S>
S frame_log_likelihood(std::span<const S> scores, int target,
                       std::span<S> grad = {});

template <typename S>
S frame_log_likelihood(const std::vector<S>& scores, int target) {
  return frame_log_likelihood(std::span<const S>(scores), target);
}

/// theta += lr * grad for every tensor (ascent on the log-likelihood).
/// A non-finite gradient raises DivergenceError naming the tensor; params are
/// left untouched in that case.
template <typename S>
void sgd_step(NetworkParams<S>& params, const NetworkParams<S>& grads, S lr);

template <typename S>
void zero_params(NetworkParams<S>& params);

enum class SelectionMetric { kFrameAccuracy, kLogLikelihood };

struct TrainConfig {
  double learning_rate = 0.01;
  int max_epochs = 20;
  int patience = 5;
  std::uint64_t seed = 1;
  bool shuffle = true;
  SelectionMetric selection = SelectionMetric::kFrameAccuracy;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;                      // 1-based
  double train_log_likelihood = 0.0;  // mean over training frames
  double cv_frame_accuracy = 0.0;     // percent
  double cv_log_likelihood = 0.0;     // mean over cv frames
};

struct TrainResult {
  NetworkParams<float> params;  // best cv epoch
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

/// Per-frame SGD in seeded shuffled order with patience-based early stopping
/// on the cv set. Initial weights come from `init` when given, otherwise from
/// init_params(config, mix_seed(seed, 0)).
TrainResult train_network(const FrameDataset& train, const FrameDataset& cv,
                          const NetworkConfig& config, const TrainConfig& tc,
                          const NetworkParams<float>* init = nullptr);

/// T x K output scores for every frame of one utterance.
Matrix<float> compute_scores(const NetworkParams<float>& params,
                             const FrameMatrix& inputs);

/// argmax of each row (smallest index on ties).
std::vector<int> argmax_rows(const Matrix<float>& scores);

struct DatasetMetrics {
  double frame_accuracy = 0.0;
  double log_likelihood = 0.0;  // mean per frame
  std::size_t frames = 0;
};

DatasetMetrics evaluate_frames(const NetworkParams<float>& params,
                               const FrameDataset& data);

// --- grid search -------------------------------------------------------------

struct GridSpec {
  std::vector<double> window_ms;
  std::vector<std::vector<int>> kernel_widths;  // one candidate list per stage
  std::vector<int> filters;
  std::vector<int> hidden_units;
  std::vector<int> pool_widths;
  // Optional seeded random subsample of the Cartesian product.
  std::optional<std::size_t> max_configs;

  /// Ranges of the original hyper-parameter table: window 100-700 ms,
  /// kernel width 1-9, 10-90 filters, 100-1500 hidden units.
  static GridSpec table_defaults(int num_stages);
  std::size_t product_size() const;
  void validate() const;
};

struct GridCandidate {
  std::size_t ordinal = 0;
  double window_ms = 0.0;
  NetworkConfig config;
};

struct GridResult {
  GridCandidate candidate;
  double cv_accuracy = 0.0;
  std::int64_t params = 0;
  std::optional<std::string> error;
};

/// Enumerates candidates in lexicographic order of (window, kW per stage,
/// filters, hidden units, pool width). Shifts, stage count, input dimension
/// and class count come from `base`.
std::vector<GridCandidate> enumerate_grid(const GridSpec& grid,
                                          const NetworkConfig& base,
                                          const FrontendConfig& frontend,
                                          std::uint64_t seed);

/// Input window in network frames for a window given in milliseconds.
int window_frames(double ms, const FrontendConfig& frontend);

/// Trains every candidate and ranks by cv accuracy descending, then fewer
/// parameters, then ordinal. Failed candidates are kept (with `error` set) at
/// the end. Candidate i trains with seed mix_seed(tc.seed, ordinal), so the
/// outcome does not depend on `parallel`.
std::vector<GridResult> grid_search(const std::vector<LabeledUtterance>& train,
                                    const std::vector<LabeledUtterance>& cv,
                                    const GridSpec& grid, const NetworkConfig& base,
                                    const FrontendConfig& frontend,
                                    std::optional<int> garbage,
                                    const TrainConfig& tc, bool parallel = false);

std::string history_csv(const std::vector<EpochStats>& history);
std::string grid_csv(const std::vector<GridResult>& results);

}  // namespace rawcnn

#endif  // RAWCNN_TRAIN_HPP_
