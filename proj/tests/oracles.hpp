// tests/oracles.hpp
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

#ifndef RAWCNN_TESTS_ORACLES_HPP_
#define RAWCNN_TESTS_ORACLES_HPP_

// Brute-force reference implementations used only by the tests. They share
// no code with the library beyond the Matrix container.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "rawcnn/matrix.hpp"

namespace oracle {

using rawcnn::Matrix;

/// Calls fn(path) for every label sequence of length t over k labels, in
/// lexicographic order.
inline void for_each_path(int t, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> y(static_cast<std::size_t>(t), 0);
  for (;;) {
    fn(y);
    int pos = t - 1;
    while (pos >= 0 && y[static_cast<std::size_t>(pos)] == k - 1) {
      y[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) return;
    ++y[static_cast<std::size_t>(pos)];
  }
}

/// CRF path score, summed left to right: e0, then + A + e per step.
inline double crf_score(const Matrix<double>& e, const Matrix<double>& a,
                        const std::vector<int>& y) {
  double s = e(0, static_cast<std::size_t>(y[0]));
  for (std::size_t t = 1; t < y.size(); ++t) {
    s = s + a(static_cast<std::size_t>(y[t]), static_cast<std::size_t>(y[t - 1]));
    s = s + e(t, static_cast<std::size_t>(y[t]));
  }
  return s;
}

/// True when `a` should win a tie against `b`: smaller label at the latest
/// position where they differ.
inline bool prefer_on_tie(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct CrfEnumeration {
  double log_z = 0.0;
  std::vector<int> best_path;
  double best_score = -std::numeric_limits<double>::infinity();
  Matrix<double> node;               // T x K posteriors
  std::vector<Matrix<double>> pair;  // pair[t](i, j) = P(y_{t+1} = i, y_t = j)
};

inline CrfEnumeration crf_enumerate(const Matrix<double>& e, const Matrix<double>& a) {
  const int t_count = static_cast<int>(e.rows());
  const int k = static_cast<int>(e.cols());
  std::vector<std::pair<std::vector<int>, double>> all;
  CrfEnumeration r;
  for_each_path(t_count, k, [&](const std::vector<int>& y) {
    const double s = crf_score(e, a, y);
    all.emplace_back(y, s);
    if (s > r.best_score || (s == r.best_score && prefer_on_tie(y, r.best_path))) {
      r.best_score = s;
      r.best_path = y;
    }
  });
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& p : all) mx = std::max(mx, p.second);
  long double sum = 0.0L;
  for (const auto& p : all) sum += std::exp(static_cast<long double>(p.second - mx));
  r.log_z = mx + static_cast<double>(std::log(sum));
  r.node = Matrix<double>(e.rows(), e.cols(), 0.0);
  for (int t = 0; t + 1 < t_count; ++t) r.pair.emplace_back(e.cols(), e.cols(), 0.0);
  for (const auto& [y, s] : all) {
    const double p = std::exp(s - r.log_z);
    for (int t = 0; t < t_count; ++t) {
      r.node(static_cast<std::size_t>(t), static_cast<std::size_t>(y[static_cast<std::size_t>(t)])) += p;
    }
    for (int t = 0; t + 1 < t_count; ++t) {
      r.pair[static_cast<std::size_t>(t)](static_cast<std::size_t>(y[static_cast<std::size_t>(t + 1)]),
                                          static_cast<std::size_t>(y[static_cast<std::size_t>(t)])) += p;
    }
  }
  return r;
}

/// CRF log-likelihood of `y` by enumerating every path in extended
/// precision. Slow (K^T paths) but with far less round-off than a double
/// forward recursion, which keeps finite differences of it clean.
inline long double crf_log_likelihood_ext(const Matrix<double>& e, const Matrix<double>& a,
                                          const std::vector<int>& y) {
  const auto score = [&](const std::vector<int>& p) {
    long double s = e(0, static_cast<std::size_t>(p[0]));
    for (std::size_t t = 1; t < p.size(); ++t) {
      s += a(static_cast<std::size_t>(p[t]), static_cast<std::size_t>(p[t - 1]));
      s += e(t, static_cast<std::size_t>(p[t]));
    }
    return s;
  };
  const long double target = score(y);
  long double sum = 0.0L;
  for_each_path(static_cast<int>(e.rows()), static_cast<int>(e.cols()),
                [&](const std::vector<int>& p) { sum += std::exp(score(p) - target); });
  return -std::log(sum);
}

/// Central difference of crf_log_likelihood_ext along transition entry `j`
/// (row-major). Divides by the step actually taken after rounding.
inline double crf_transition_difference(const Matrix<double>& e, const Matrix<double>& a,
                                        const std::vector<int>& y, std::size_t j, double eps) {
  auto plus = a, minus = a;
  plus.data()[j] += eps;
  minus.data()[j] -= eps;
  const long double step = static_cast<long double>(plus.data()[j]) - minus.data()[j];
  return static_cast<double>(
      (crf_log_likelihood_ext(e, plus, y) - crf_log_likelihood_ext(e, minus, y)) / step);
}

/// Maximal runs of equal labels, as lengths.
inline std::vector<int> run_lengths(const std::vector<int>& y) {
  std::vector<int> runs;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i == 0 || y[i] != y[i - 1]) runs.push_back(0);
    ++runs.back();
  }
  return runs;
}

struct HmmEnumeration {
  bool any_legal = false;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> best_frames;
};

/// Max over all frame labelings whose every run of equal labels is at least
/// `d` frames long; scores are summed left to right.
inline HmmEnumeration hmm_enumerate(const Matrix<double>& log_scores, int d) {
  HmmEnumeration r;
  for_each_path(static_cast<int>(log_scores.rows()), static_cast<int>(log_scores.cols()),
                [&](const std::vector<int>& y) {
                  const auto runs = run_lengths(y);
                  if (std::any_of(runs.begin(), runs.end(), [&](int n) { return n < d; })) return;
                  double s = log_scores(0, static_cast<std::size_t>(y[0]));
                  for (std::size_t t = 1; t < y.size(); ++t) {
                    s = s + log_scores(t, static_cast<std::size_t>(y[t]));
                  }
                  if (!r.any_legal || s > r.best_score) {
                    r.best_score = s;
                    r.best_frames = y;
                  }
                  r.any_legal = true;
                });
  return r;
}

/// Levenshtein distance by memoized recursion on suffixes.
template <typename T>
int levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, go(i + 1, j) + 1);
    best = std::min(best, go(i, j + 1) + 1);
    memo[key] = best;
    return best;
  };
  return go(0, 0);
}

/// |X[b]| of the zero-padded DFT, via std::complex and std::polar.
inline std::vector<double> dft_magnitude(const std::vector<double>& x, int n_fft) {
  std::vector<double> out;
  for (int b = 0; b <= n_fft / 2; ++b) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * b * static_cast<double>(n) / n_fft);
    }
    out.push_back(std::abs(acc));
  }
  return out;
}

/// Frame counts after each conv and pool, found by sliding windows one
/// position at a time rather than with the closed-form formula.
struct SimStage {
  int kernel_width, shift, pool_width;
};

inline std::vector<std::pair<long, long>> simulate_shapes(long frames,
                                                          const std::vector<SimStage>& stages) {
  std::vector<std::pair<long, long>> out;
  for (const auto& s : stages) {
    long conv = 0;
    for (long start = 0; start + s.kernel_width <= frames; start += s.shift) ++conv;
    long pooled = 0;
    for (long start = 0; start + s.pool_width <= conv; start += s.pool_width) ++pooled;
    out.emplace_back(conv, pooled);
    frames = pooled;
  }
  return out;
}

/// Central difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t i, double eps) {
  const double saved = x[i];
  x[i] = saved + eps;
  const double plus = f(x);
  x[i] = saved - eps;
  const double minus = f(x);
  return (plus - minus) / (2.0 * eps);
}

}  // namespace oracle

#endif  // RAWCNN_TESTS_ORACLES_HPP_
