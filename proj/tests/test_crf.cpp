// tests/test_crf.cpp
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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rawcnn/crf.hpp"
#include "rawcnn/nn.hpp"
#include "rawcnn/rng.hpp"

using namespace rawcnn;

namespace {

Matrix<double> mat(std::size_t r, std::size_t c, std::vector<double> v) {
  return Matrix<double>(r, c, std::move(v));
}

Matrix<double> random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix<double> m(r, c);
  for (auto& v : m.values()) v = 2.0 * rng.normal();
  return m;
}

const auto kE = mat(2, 2, {1, 0, 0, 1});
const auto kA = mat(2, 2, {0.5, -0.5, -0.5, 0.5});

}  // namespace

TEST_CASE("path score") {
  const std::vector<int> y = {0, 1};
  CHECK(crf::path_score(kE, kA, y) == 1.5);
  const std::vector<int> one = {1};
  CHECK(crf::path_score(mat(1, 2, {0.25, 2.5}), kA, one) == 2.5);
  const std::vector<int> y3 = {1, 0, 1};
  CHECK(crf::path_score(mat(3, 2, {1, 2, 3, 4, 5, 6}), Matrix<double>(2, 2), y3) == 2 + 3 + 6);
  const std::vector<int> bad = {0, 2};
  CHECK_THROWS(crf::path_score(kE, kA, bad));
  const std::vector<int> short_path = {0};
  CHECK_THROWS(crf::path_score(kE, kA, short_path));
}

TEST_CASE("log partition") {
  CHECK(crf::log_partition(kE, kA) == doctest::Approx(std::log(3 * std::exp(1.5) + std::exp(-0.5))));
  CHECK(std::abs(crf::log_partition(kE, kA) - 2.642736) < 1e-6);
  CHECK(crf::log_partition(mat(1, 3, {1, 2, 3}), Matrix<double>(3, 3)) ==
        doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
  for (std::size_t t = 1; t <= 5; ++t) {
    CHECK(crf::log_partition(Matrix<double>(t, 3), Matrix<double>(3, 3)) ==
          doctest::Approx(static_cast<double>(t) * std::log(3.0)));
  }
}

TEST_CASE("log-likelihood") {
  const std::vector<int> y = {0, 1};
  CHECK(std::abs(crf::log_likelihood(kE, kA, y) - (1.5 - 2.642736)) < 1e-6);
  const std::vector<int> only = {0, 0, 0};
  CHECK(crf::log_likelihood(mat(3, 1, {1, 2, 3}), mat(1, 1, {4}), only) == 0.0);
  const std::vector<int> any = {2, 0, 1, 1};
  CHECK(crf::log_likelihood(Matrix<double>(4, 3), Matrix<double>(3, 3), any) ==
        doctest::Approx(-4.0 * std::log(3.0)));
}

TEST_CASE("viterbi") {
  const auto r = crf::viterbi(mat(2, 2, {2, 0, 0, 1}), mat(2, 2, {0.3, 0.1, 0.2, 0.4}));
  CHECK(r.path == std::vector<int>{0, 1});
  CHECK(r.score == doctest::Approx(3.2));

  const auto e = mat(4, 3, {1, 3, 3, 0, 0, 0, 5, 2, 5, 0, 1, 0});
  CHECK(crf::viterbi(e, Matrix<double>(3, 3)).path == std::vector<int>{1, 0, 0, 1});
  CHECK(crf::viterbi(mat(3, 1, {1, 2, 3}), mat(1, 1, {-1})).path == std::vector<int>{0, 0, 0});
}

TEST_CASE("marginals") {
  const auto single = crf::forward_backward(mat(1, 3, {0.5, -1, 2}), Matrix<double>(3, 3));
  const auto p = softmax(std::vector<double>{0.5, -1, 2});
  for (std::size_t i = 0; i < 3; ++i) CHECK(single.node(0, i) == doctest::Approx(p[i]));

  const auto uniform = crf::forward_backward(Matrix<double>(5, 4, 0.3), Matrix<double>(4, 4, -0.2));
  for (double v : uniform.node.values()) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("enumeration properties") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = 1 + rng.index(5);
    const auto k = 1 + rng.index(3);
    const auto e = random_matrix(rng, t, k);
    const auto a = random_matrix(rng, k, k);
    const double z = crf::log_partition(e, a);

    const auto ref = oracle::crf_enumerate(e, a);
    double total = 0.0;
    oracle::for_each_path(static_cast<int>(t), static_cast<int>(k), [&](const std::vector<int>& y) {
      total += std::exp(crf::log_likelihood(e, a, y));
      const double s = crf::path_score(e, a, y);
      if (t == 1 && k == 1) {
        CHECK(z == doctest::Approx(s));
      } else {
        // A dominant path can absorb the others below one ulp; any path
        // scoring below the best leaves a visible gap.
        CHECK(z >= s);
        if (s < ref.best_score) CHECK(z > s);
      }
    });
    CHECK(std::abs(total - 1.0) < 1e-8);

    const auto m = crf::forward_backward(e, a);
    for (std::size_t i = 0; i < m.node.size(); ++i) {
      CHECK(std::abs(m.node.data()[i] - ref.node.data()[i]) < 1e-8);
    }
    const auto v = crf::viterbi(e, a);
    CHECK(v.path == ref.best_path);
    CHECK(v.score == ref.best_score);
  }
}

TEST_CASE("shifting one frame's emissions") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = 1 + rng.index(6);
    const auto k = 2 + rng.index(3);
    const auto e = random_matrix(rng, t, k);
    const auto a = random_matrix(rng, k, k);
    // Powers of two keep the shifted sums exact.
    const double c = std::ldexp(1.0, static_cast<int>(rng.index(6)) - 2);
    auto shifted = e;
    const auto frame = rng.index(t);
    for (std::size_t i = 0; i < k; ++i) shifted(frame, i) += c;
    std::vector<int> y(t);
    for (auto& v : y) v = static_cast<int>(rng.index(k));
    CHECK(crf::path_score(shifted, a, y) == doctest::Approx(crf::path_score(e, a, y) + c).epsilon(1e-14));
    CHECK(crf::log_partition(shifted, a) == doctest::Approx(crf::log_partition(e, a) + c).epsilon(1e-12));
    CHECK(std::abs(crf::log_likelihood(shifted, a, y) - crf::log_likelihood(e, a, y)) < 1e-9);
    CHECK(crf::viterbi(shifted, a).path == crf::viterbi(e, a).path);
  }
}

TEST_CASE("transition gradient matches finite differences") {
  Rng rng(23);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = 2 + rng.index(5);
    const auto k = 2 + rng.index(3);
    const auto e = random_matrix(rng, t, k);
    const auto a = random_matrix(rng, k, k);
    std::vector<int> y(t);
    for (auto& v : y) v = static_cast<int>(rng.index(k));
    const auto g = crf::transition_gradient(e, a, y);
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double n = oracle::crf_transition_difference(e, a, y, j, 1e-5);
      const double err = std::abs(n - g.data()[j]);
      worst = std::max(worst, err / std::max({std::abs(n), std::abs(g.data()[j]), 1e-5}));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("transition training") {
  Rng rng(24);
  std::vector<crf::Example> data;
  for (int u = 0; u < 20; ++u) {
    crf::Example ex;
    ex.emissions = Matrix<double>(12, 2);  // uninformative
    // Runs of 0 then 1, never 1 -> 0.
    const auto switch_at = 1 + rng.index(10);
    for (std::size_t t = 0; t < 12; ++t) ex.labels.push_back(t < switch_at ? 0 : 1);
    data.push_back(std::move(ex));
  }

  crf::TrainOptions frozen;
  frozen.learning_rate = 0.0;
  CHECK(crf::train_transitions(data, frozen, 2) == Matrix<double>(2, 2));

  // A(i, j) scores j -> i, so the unseen 1 -> 0 move is A(0, 1).
  double previous = 0.0;
  for (int epochs = 1; epochs <= 4; ++epochs) {
    crf::TrainOptions o;
    o.learning_rate = 0.01;
    o.epochs = epochs;
    const auto a = crf::train_transitions(data, o, 2);
    CHECK(a(0, 1) < previous);
    previous = a(0, 1);
  }

  crf::TrainOptions o;
  CHECK(crf::train_transitions(data, o, 2) == crf::train_transitions(data, o, 2));
}
