// src/crf.cpp
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

#include "rawcnn/crf.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rawcnn/errors.hpp"
#include "rawcnn/rng.hpp"
#include "rawcnn/train.hpp"

namespace rawcnn::crf {

namespace {

void check_shapes(const Emissions& e, const Transitions& a) {
  if (e.rows() == 0 || e.cols() == 0) {
    throw std::invalid_argument("crf: emissions must have T >= 1 and K >= 1");
  }
  if (a.rows() != e.cols() || a.cols() != e.cols()) {
    throw std::invalid_argument("crf: transition matrix must be K x K with K = " +
                                std::to_string(e.cols()));
  }
}

void check_path(const Emissions& e, std::span<const int> y) {
  if (y.size() != e.rows()) {
    throw std::invalid_argument("crf: path length " + std::to_string(y.size()) +
                                " != T = " + std::to_string(e.rows()));
  }
  for (int v : y) {
    if (v < 0 || static_cast<std::size_t>(v) >= e.cols()) {
      throw std::invalid_argument("crf: label " + std::to_string(v) + " out of range");
    }
  }
}

// alpha(t, i) = e(t, i) + logadd_j(alpha(t-1, j) + A(i, j))
Matrix<double> forward(const Emissions& e, const Transitions& a) {
  const std::size_t t_count = e.rows(), k = e.cols();
  Matrix<double> alpha(t_count, k);
  std::vector<double> tmp(k);
  for (std::size_t i = 0; i < k; ++i) alpha(0, i) = e(0, i);
  for (std::size_t t = 1; t < t_count; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) tmp[j] = alpha(t - 1, j) + a(i, j);
      alpha(t, i) = e(t, i) + logadd<double>(tmp);
    }
  }
  return alpha;
}

// beta(t, j) = logadd_i(A(i, j) + e(t+1, i) + beta(t+1, i)), beta(T-1, .) = 0
Matrix<double> backward(const Emissions& e, const Transitions& a) {
  const std::size_t t_count = e.rows(), k = e.cols();
  Matrix<double> beta(t_count, k, 0.0);
  std::vector<double> tmp(k);
  for (std::size_t t = t_count - 1; t-- > 0;) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < k; ++i) tmp[i] = a(i, j) + e(t + 1, i) + beta(t + 1, i);
      beta(t, j) = logadd<double>(tmp);
    }
  }
  return beta;
}

double last_row_logadd(const Matrix<double>& alpha) {
  return logadd<double>(alpha.row(alpha.rows() - 1));
}

}  // namespace

double path_score(const Emissions& e, const Transitions& a, std::span<const int> y) {
  check_shapes(e, a);
  check_path(e, y);
  double s = e(0, static_cast<std::size_t>(y[0]));
  for (std::size_t t = 1; t < y.size(); ++t) {
    const auto cur = static_cast<std::size_t>(y[t]);
    const auto prev = static_cast<std::size_t>(y[t - 1]);
    s = (s + a(cur, prev)) + e(t, cur);
  }
  return s;
}

double log_partition(const Emissions& e, const Transitions& a) {
  check_shapes(e, a);
  return last_row_logadd(forward(e, a));
}

double log_likelihood(const Emissions& e, const Transitions& a, std::span<const int> y) {
  return path_score(e, a, y) - log_partition(e, a);
}

ViterbiResult viterbi(const Emissions& e, const Transitions& a) {
  check_shapes(e, a);
  const std::size_t t_count = e.rows(), k = e.cols();
  Matrix<double> delta(t_count, k);
  Matrix<int> back(t_count, k, 0);
  for (std::size_t i = 0; i < k; ++i) delta(0, i) = e(0, i);
  for (std::size_t t = 1; t < t_count; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t best = 0;
      double best_v = delta(t - 1, 0) + a(i, 0);
      for (std::size_t j = 1; j < k; ++j) {
        const double v = delta(t - 1, j) + a(i, j);
        if (v > best_v) best_v = v, best = j;
      }
      delta(t, i) = best_v + e(t, i);
      back(t, i) = static_cast<int>(best);
    }
  }
  ViterbiResult r;
  std::size_t last = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (delta(t_count - 1, i) > delta(t_count - 1, last)) last = i;
  }
  r.score = delta(t_count - 1, last);
  r.path.resize(t_count);
  r.path[t_count - 1] = static_cast<int>(last);
  for (std::size_t t = t_count - 1; t > 0; --t) {
    r.path[t - 1] = back(t, static_cast<std::size_t>(r.path[t]));
  }
  return r;
}

Marginals forward_backward(const Emissions& e, const Transitions& a) {
  check_shapes(e, a);
  const std::size_t t_count = e.rows(), k = e.cols();
  const auto alpha = forward(e, a);
  const auto beta = backward(e, a);
  const double log_z = last_row_logadd(alpha);
  Marginals m;
  m.node = Matrix<double>(t_count, k);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      m.node(t, i) = std::exp(alpha(t, i) + beta(t, i) - log_z);
    }
  }
  m.pair.reserve(t_count > 0 ? t_count - 1 : 0);
  for (std::size_t t = 0; t + 1 < t_count; ++t) {
    Matrix<double> p(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        p(i, j) = std::exp(alpha(t, j) + a(i, j) + e(t + 1, i) + beta(t + 1, i) - log_z);
      }
    }
    m.pair.push_back(std::move(p));
  }
  return m;
}

Transitions transition_gradient(const Emissions& e, const Transitions& a,
                                std::span<const int> y) {
  check_shapes(e, a);
  check_path(e, y);
  const std::size_t k = e.cols();
  Transitions g(k, k, 0.0);
  for (std::size_t t = 1; t < y.size(); ++t) {
    g(static_cast<std::size_t>(y[t]), static_cast<std::size_t>(y[t - 1])) += 1.0;
  }
  const auto m = forward_backward(e, a);
  for (const auto& p : m.pair) {
    for (std::size_t i = 0; i < p.size(); ++i) g.data()[i] -= p.data()[i];
  }
  return g;
}

Transitions train_transitions(const std::vector<Example>& data,
                              const TrainOptions& options, int num_classes) {
  if (num_classes < 1) throw std::invalid_argument("crf: num_classes must be >= 1");
  if (!(options.learning_rate >= 0.0) || options.epochs < 0) {
    throw std::invalid_argument("crf: invalid training options");
  }
  const auto k = static_cast<std::size_t>(num_classes);
  Transitions a(k, k, 0.0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t u : order) {
      const auto g = transition_gradient(data[u].emissions, a, data[u].labels);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double next = a.data()[i] + options.learning_rate * g.data()[i];
        if (!std::isfinite(next)) {
          throw DivergenceError("crf: non-finite transition score at epoch " +
                                std::to_string(epoch + 1) + ", utterance " +
                                std::to_string(u));
        }
        a.data()[i] = next;
      }
    }
  }
  return a;
}

}  // namespace rawcnn::crf
