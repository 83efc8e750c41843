// include/rawcnn/crf.hpp
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

#ifndef RAWCNN_CRF_HPP_
#define RAWCNN_CRF_HPP_

// Linear-chain CRF over frame scores.
//
// Path score of labels y over emissions f (T x K) and transitions A (K x K,
// A(i, j) scores moving from label j at t-1 to label i at t):
//
//   s(y) = f(0, y_0) + sum_{t >= 1} [ A(y_t, y_{t-1}) + f(t, y_t) ]
//
// There is no transition term into the first frame. Path probabilities are
// exp(s(y) - logZ) with logZ the logadd over all K^T paths.

#include <cstdint>
#include <span>
#include <vector>

#include "rawcnn/matrix.hpp"

namespace rawcnn::crf {

using Emissions = Matrix<double>;
using Transitions = Matrix<double>;

double path_score(const Emissions& e, const Transitions& a, std::span<const int> y);
double log_partition(const Emissions& e, const Transitions& a);
double log_likelihood(const Emissions& e, const Transitions& a, std::span<const int> y);

struct ViterbiResult {
  std::vector<int> path;
  double score = 0.0;
};

/// Max-score path. Among tied paths the one with the smaller label at the
/// latest differing position wins.
ViterbiResult viterbi(const Emissions& e, const Transitions& a);

struct Marginals {
  Matrix<double> node;               // T x K, P(y_t = i)
  std::vector<Matrix<double>> pair;  // T-1 slices, pair[t](i, j) = P(y_{t+1} = i, y_t = j)
};

Marginals forward_backward(const Emissions& e, const Transitions& a);

/// d log_likelihood / dA: observed transition counts minus expected counts.
Transitions transition_gradient(const Emissions& e, const Transitions& a,
                                std::span<const int> y);

struct Example {
  Emissions emissions;
  std::vector<int> labels;
};

struct TrainOptions {
  double learning_rate = 0.1;
  int epochs = 20;
  std::uint64_t seed = 1;
};

/// Gradient ascent on the summed log-likelihood, one step per utterance in
/// seeded shuffled order, starting from A = 0. Emissions stay fixed.
Transitions train_transitions(const std::vector<Example>& data,
                              const TrainOptions& options, int num_classes);

}  // namespace rawcnn::crf

#endif  // RAWCNN_CRF_HPP_
