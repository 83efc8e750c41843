// src/hmm.cpp
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

#include "rawcnn/hmm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rawcnn/errors.hpp"
#include "rawcnn/eval.hpp"

namespace rawcnn::hmm {

std::vector<int> DurationGraph::predecessors(int state) const {
  const int k = label_of(state);
  const int s = position_of(state);
  const int last = states_per_label - 1;
  std::vector<int> out;
  if (s == 0) {
    for (int p = 0; p < num_labels; ++p) out.push_back(p * states_per_label + last);
    return out;
  }
  out.push_back(state - 1);
  if (s == last) out.push_back(state);
  (void)k;
  return out;
}

DurationGraph build_duration_graph(int num_labels, int states_per_label) {
  if (num_labels < 1) throw std::invalid_argument("duration graph: K must be >= 1");
  if (states_per_label < 1) throw std::invalid_argument("duration graph: D must be >= 1");
  return DurationGraph{num_labels, states_per_label};
}

DecodeResult decode_log_scores(const Matrix<double>& log_scores,
                               const DurationGraph& graph) {
  const std::size_t t_count = log_scores.rows();
  if (log_scores.cols() != static_cast<std::size_t>(graph.num_labels)) {
    throw std::invalid_argument("hmm: score matrix has " +
                                std::to_string(log_scores.cols()) + " columns, graph has " +
                                std::to_string(graph.num_labels) + " labels");
  }
  if (t_count < static_cast<std::size_t>(graph.states_per_label)) {
    throw DataError("hmm: no legal path for " + std::to_string(t_count) +
                    " frames with minimum duration " +
                    std::to_string(graph.states_per_label));
  }
  const int n = graph.num_states();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) preds[static_cast<std::size_t>(q)] = graph.predecessors(q);

  Matrix<double> delta(t_count, static_cast<std::size_t>(n), neg_inf);
  Matrix<int> back(t_count, static_cast<std::size_t>(n), -1);
  // `reachable` tracks legality separately from the score so -inf emissions
  // (zero posteriors) cannot make an illegal state look legal.
  Matrix<char> reachable(t_count, static_cast<std::size_t>(n), 0);
  for (int q = 0; q < n; ++q) {
    if (graph.position_of(q) != 0) continue;
    delta(0, static_cast<std::size_t>(q)) =
        log_scores(0, static_cast<std::size_t>(graph.label_of(q)));
    reachable(0, static_cast<std::size_t>(q)) = 1;
  }
  for (std::size_t t = 1; t < t_count; ++t) {
    for (int q = 0; q < n; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      int best = -1;
      double best_v = neg_inf;
      for (int p : preds[qi]) {
        const auto pi = static_cast<std::size_t>(p);
        if (!reachable(t - 1, pi)) continue;
        if (best < 0 || delta(t - 1, pi) > best_v) {
          best = p;
          best_v = delta(t - 1, pi);
        }
      }
      if (best < 0) continue;
      reachable(t, qi) = 1;
      back(t, qi) = best;
      delta(t, qi) = best_v + log_scores(t, static_cast<std::size_t>(graph.label_of(q)));
    }
  }
  int end = -1;
  for (int q = 0; q < n; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    if (graph.position_of(q) != graph.states_per_label - 1 || !reachable(t_count - 1, qi)) {
      continue;
    }
    if (end < 0 || delta(t_count - 1, qi) > delta(t_count - 1, static_cast<std::size_t>(end))) {
      end = q;
    }
  }
  if (end < 0) throw DataError("hmm: no legal path");

  DecodeResult r;
  r.score = delta(t_count - 1, static_cast<std::size_t>(end));
  r.frame_labels.resize(t_count);
  int q = end;
  for (std::size_t t = t_count; t-- > 0;) {
    r.frame_labels[t] = graph.label_of(q);
    if (t > 0) q = back(t, static_cast<std::size_t>(q));
  }
  r.phonemes = collapse_path(r.frame_labels);
  return r;
}

DecodeResult decode(const Matrix<double>& posteriors, const DurationGraph& graph) {
  Matrix<double> logs(posteriors.rows(), posteriors.cols());
  for (std::size_t t = 0; t < posteriors.rows(); ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < posteriors.cols(); ++i) {
      const double p = posteriors(t, i);
      if (!(p >= 0.0)) throw std::invalid_argument("hmm: negative posterior at frame " + std::to_string(t));
      sum += p;
      logs(t, i) = std::log(p);
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw std::invalid_argument("hmm: posteriors at frame " + std::to_string(t) +
                                  " sum to " + std::to_string(sum));
    }
  }
  return decode_log_scores(logs, graph);
}

}  // namespace rawcnn::hmm
