// tests/test_nn.cpp
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "rawcnn/diagnostics.hpp"
#include "rawcnn/errors.hpp"
#include "rawcnn/layers.hpp"
#include "rawcnn/nn.hpp"
#include "rawcnn/rng.hpp"

using namespace rawcnn;

namespace {

Matrix<double> random_input(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix<double> m(rows, cols);
  for (auto& v : m.values()) v = rng.normal();
  return m;
}

ConvLayerParams<double> random_conv(Rng& rng, int kw, int dw, int din, int dout) {
  ConvLayerParams<double> p(kw, dw, din, dout);
  for (auto& v : p.weights.values()) v = rng.normal();
  for (auto& v : p.bias) v = rng.normal();
  return p;
}

NetworkConfig best_raw() {
  NetworkConfig c;
  c.input_window = 4320;
  c.stages = {{10, 10, 90, 3}, {5, 1, 90, 3}, {9, 1, 90, 3}};
  c.hidden_units = 500;
  c.num_classes = 40;
  return c;
}

}  // namespace

TEST_CASE("convolution examples") {
  Matrix<double> x(4, 1, std::vector<double>{1, 2, 3, 4});
  ConvLayerParams<double> p(3, 1, 1, 1);
  p.weights = Matrix<double>(1, 3, std::vector<double>{1, 0, -1});
  const auto y = conv_forward(x, p);
  CHECK(y == Matrix<double>(2, 1, std::vector<double>{-2, -2}));

  Rng rng(1);
  const auto in = random_input(rng, 6, 3);
  ConvLayerParams<double> id(1, 1, 3, 3);
  for (std::size_t i = 0; i < 3; ++i) id.weights(i, i) = 1.0;
  CHECK(conv_forward(in, id) == in);

  CHECK(conv_output_frames(4320, 10, 10) == 432);
  CHECK_THROWS_AS(conv_forward(Matrix<double>(2, 1), p), ShapeError);
  CHECK_THROWS_AS(conv_forward(Matrix<double>(4, 2), p), ShapeError);
}

TEST_CASE("max pooling examples") {
  Matrix<double> x(6, 1, std::vector<double>{1, 5, 3, 2, 2, 4});
  CHECK(maxpool_forward(x, 3) == Matrix<double>(2, 1, std::vector<double>{5, 4}));
  CHECK(maxpool_forward(x, 1) == x);
  CHECK(maxpool_forward(Matrix<double>(7, 2), 3).rows() == 2);
  CHECK_THROWS_AS(maxpool_forward(x, 7), ShapeError);
  CHECK_THROWS_AS(maxpool_forward(x, 0), ShapeError);
}

TEST_CASE("convolution is linear and shift equivariant") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int kw = 1 + static_cast<int>(rng.index(5));
    const int din = 1 + static_cast<int>(rng.index(3));
    auto p = random_conv(rng, kw, 1 + static_cast<int>(rng.index(3)), din, 1 + static_cast<int>(rng.index(4)));
    std::fill(p.bias.begin(), p.bias.end(), 0.0);
    const std::size_t t = static_cast<std::size_t>(kw) + 4 + rng.index(10);
    const auto x = random_input(rng, t, static_cast<std::size_t>(din));
    const auto y = random_input(rng, t, static_cast<std::size_t>(din));
    const double a = rng.normal(), b = rng.normal();
    Matrix<double> mix(t, static_cast<std::size_t>(din));
    for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = a * x.data()[i] + b * y.data()[i];
    const auto cx = conv_forward(x, p), cy = conv_forward(y, p), cm = conv_forward(mix, p);
    for (std::size_t i = 0; i < cm.size(); ++i) {
      CHECK(std::abs(cm.data()[i] - (a * cx.data()[i] + b * cy.data()[i])) < 1e-9);
    }

    // Unit shift, unit stride: out(x shifted)[j] == out(x)[j + 1].
    auto q = p;
    q.shift = 1;
    Matrix<double> shifted(t - 1, static_cast<std::size_t>(din));
    std::copy(x.data() + din, x.data() + x.size(), shifted.data());
    const auto full = conv_forward(x, q), part = conv_forward(shifted, q);
    REQUIRE(part.rows() + 1 == full.rows());
    for (std::size_t j = 0; j < part.rows(); ++j) {
      for (std::size_t o = 0; o < part.cols(); ++o) CHECK(part(j, o) == full(j + 1, o));
    }
  }
}

TEST_CASE("pooling is bounded by and permutation invariant within each window") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + static_cast<int>(rng.index(4));
    auto x = random_input(rng, static_cast<std::size_t>(w) * (1 + rng.index(5)) + rng.index(static_cast<std::size_t>(w)), 3);
    const auto y = maxpool_forward(x, w);
    for (std::size_t j = 0; j < y.rows(); ++j) {
      for (std::size_t i = 0; i < y.cols(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < w; ++s) mx = std::max(mx, x(j * static_cast<std::size_t>(w) + static_cast<std::size_t>(s), i));
        CHECK(y(j, i) == mx);
      }
    }
    auto perm = x;
    for (std::size_t j = 0; j < y.rows(); ++j) {
      for (std::size_t i = 0; i < perm.cols(); ++i) {
        std::vector<double> window;
        for (int s = 0; s < w; ++s) window.push_back(perm(j * static_cast<std::size_t>(w) + static_cast<std::size_t>(s), i));
        rng.shuffle(window.begin(), window.end());
        for (int s = 0; s < w; ++s) perm(j * static_cast<std::size_t>(w) + static_cast<std::size_t>(s), i) = window[static_cast<std::size_t>(s)];
      }
    }
    CHECK(maxpool_forward(perm, w) == y);
  }
}

TEST_CASE("serial and parallel kernels agree") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int kw = 1 + static_cast<int>(rng.index(9));
    const int dw = 1 + static_cast<int>(rng.index(4));
    const int din = 1 + static_cast<int>(rng.index(5));
    const int dout = 1 + static_cast<int>(rng.index(40));
    const auto p = random_conv(rng, kw, dw, din, dout);
    // Sizes on both sides of the parallel work threshold.
    const std::size_t t = static_cast<std::size_t>(kw) + rng.index(trial % 3 == 0 ? 3000 : 30);
    const auto x = random_input(rng, t, static_cast<std::size_t>(din));

    Matrix<double> ys, yp;
    serial::conv_forward(x, p, ys);
    parallel::conv_forward(x, p, yp);
    REQUIRE(ys.rows() == yp.rows());
    for (std::size_t i = 0; i < ys.size(); ++i) CHECK(std::abs(ys.data()[i] - yp.data()[i]) < 1e-10);

    const auto g = random_input(rng, ys.rows(), ys.cols());
    ConvLayerParams<double> gs(kw, dw, din, dout), gp(kw, dw, din, dout);
    Matrix<double> gxs, gxp;
    serial::conv_backward(x, p, g, gs, &gxs);
    parallel::conv_backward(x, p, g, gp, &gxp);
    for (std::size_t i = 0; i < gs.weights.size(); ++i) {
      CHECK(std::abs(gs.weights.data()[i] - gp.weights.data()[i]) < 1e-9);
    }
    for (std::size_t i = 0; i < gs.bias.size(); ++i) CHECK(std::abs(gs.bias[i] - gp.bias[i]) < 1e-9);
    for (std::size_t i = 0; i < gxs.size(); ++i) CHECK(std::abs(gxs.data()[i] - gxp.data()[i]) < 1e-9);

    const int w = 1 + static_cast<int>(rng.index(3));
    if (ys.rows() >= static_cast<std::size_t>(w)) {
      Matrix<double> ps, pp;
      std::vector<std::uint32_t> as, ap;
      serial::maxpool_forward(ys, w, ps, as);
      parallel::maxpool_forward(ys, w, pp, ap);
      CHECK(ps == pp);
      CHECK(as == ap);
      const auto gpool = random_input(rng, ps.rows(), ps.cols());
      Matrix<double> bs, bp;
      serial::maxpool_backward(gpool, as, ys.rows(), bs);
      parallel::maxpool_backward(gpool, ap, ys.rows(), bp);
      CHECK(bs == bp);
    }

    const auto wd = random_input(rng, 1 + rng.index(50), 1 + rng.index(300));
    std::vector<double> b(wd.rows()), in(wd.cols()), outs(wd.rows()), outp(wd.rows());
    for (auto& v : b) v = rng.normal();
    for (auto& v : in) v = rng.normal();
    serial::dense_forward<double>(wd, b, in, outs);
    parallel::dense_forward<double>(wd, b, in, outp);
    for (std::size_t i = 0; i < outs.size(); ++i) CHECK(std::abs(outs[i] - outp[i]) < 1e-10);
  }
}

TEST_CASE("stage shapes match a sliding-window simulation") {
  const auto shapes = stage_shapes(best_raw());
  REQUIRE(shapes.size() == 3);
  CHECK(shapes[0].conv_frames == 432);
  CHECK(shapes[0].pooled_frames == 144);
  CHECK(shapes[1].conv_frames == 140);
  CHECK(shapes[1].pooled_frames == 46);
  CHECK(shapes[2].conv_frames == 38);
  CHECK(shapes[2].pooled_frames == 12);
  CHECK(flattened_size(best_raw()) == 1080);

  Rng rng(5);
  int compared = 0;
  while (compared < 200) {
    NetworkConfig c;
    c.input_window = 1 + static_cast<int>(rng.index(400));
    std::vector<oracle::SimStage> sim;
    for (std::size_t s = 0, n = rng.index(4); s < n; ++s) {
      StageConfig st{1 + static_cast<int>(rng.index(9)), 1 + static_cast<int>(rng.index(4)), 2,
                     1 + static_cast<int>(rng.index(3))};
      c.stages.push_back(st);
      sim.push_back({st.kernel_width, st.shift, st.pool_width});
    }
    const auto expected = oracle::simulate_shapes(c.input_window, sim);
    const bool feasible = std::all_of(expected.begin(), expected.end(),
                                      [](const auto& p) { return p.first > 0 && p.second > 0; });
    if (!feasible) {
      CHECK_THROWS_AS(stage_shapes(c), ShapeError);
      continue;
    }
    const auto got = stage_shapes(c);
    for (std::size_t s = 0; s < sim.size(); ++s) {
      CHECK(got[s].conv_frames == static_cast<std::size_t>(expected[s].first));
      CHECK(got[s].pooled_frames == static_cast<std::size_t>(expected[s].second));
    }
    ++compared;
  }
}

TEST_CASE("parameter counts") {
  NetworkConfig mlp;
  mlp.input_window = 1;
  mlp.hidden_units = 500;
  mlp.num_classes = 40;
  CHECK(param_count(mlp) == 21040);
  CHECK(param_count(best_raw()) ==
        900 + 90 + 40500 + 90 + 72900 + 90 + 1080 * 500 + 500 + 500 * 40 + 40);
  CHECK(static_cast<std::size_t>(param_count(best_raw())) ==
        NetworkParams<float>::zeros(best_raw()).size());

  // One more pooling layer shrinks the flattened size and therefore the count.
  auto pooled = best_raw();
  auto unpooled = best_raw();
  unpooled.stages[2].pool_width = 1;
  CHECK(param_count(pooled) < param_count(unpooled));
}

TEST_CASE("softmax") {
  CHECK(softmax(std::vector<double>{0, 0}) == std::vector<double>{0.5, 0.5});
  const auto p = softmax(std::vector<double>{std::log(2.0), 0.0});
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0));
  CHECK(softmax(std::vector<double>{1000, 1000}) == std::vector<double>{0.5, 0.5});

  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(1 + rng.index(10));
    for (auto& v : f) v = 10.0 * rng.normal();
    const auto a = softmax(f);
    double sum = 0.0;
    for (double v : a) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    const double c = 100.0 * rng.normal();
    for (auto& v : f) v += c;
    const auto b = softmax(f);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
  }
}

TEST_CASE("forward pass") {
  NetworkConfig c;
  c.input_window = 20;
  c.stages = {{4, 2, 3, 2}, {2, 1, 2, 1}};
  c.hidden_units = 5;
  c.num_classes = 3;

  SUBCASE("zero weights give the output bias") {
    auto params = NetworkParams<double>::zeros(c);
    params.output_bias = {0.5, -1.0, 2.0};
    ForwardCache<double> cache;
    std::vector<double> x(20, 0.3);
    const auto f = forward_pass<double>(x, params, cache);
    CHECK(std::vector<double>(f.begin(), f.end()) == params.output_bias);
  }

  SUBCASE("pure function of its input") {
    const auto params = init_params<double>(c, 9);
    Rng rng(9);
    std::vector<double> x(20);
    for (auto& v : x) v = rng.normal();
    ForwardCache<double> c1, c2;
    const auto a = forward_pass<double>(x, params, c1);
    const std::vector<double> first(a.begin(), a.end());
    const auto b = forward_pass<double>(x, params, c2);
    CHECK(first == std::vector<double>(b.begin(), b.end()));
    const auto again = forward_pass<double>(x, params, c1);
    CHECK(first == std::vector<double>(again.begin(), again.end()));
  }

  SUBCASE("zero-stage network is a two-layer perceptron") {
    NetworkConfig m;
    m.input_window = 1;
    m.input_dim = 4;
    m.hidden_units = 3;
    m.num_classes = 2;
    const auto params = init_params<double>(m, 2);
    std::vector<double> x = {0.1, -0.2, 0.3, 0.4};
    ForwardCache<double> cache;
    const auto f = forward_pass<double>(x, params, cache);
    std::vector<double> h(3);
    for (std::size_t r = 0; r < 3; ++r) {
      double acc = params.hidden_bias[r];
      for (std::size_t k = 0; k < 4; ++k) acc += params.hidden_weights(r, k) * x[k];
      h[r] = std::tanh(acc);
    }
    for (std::size_t o = 0; o < 2; ++o) {
      double acc = params.output_bias[o];
      for (std::size_t r = 0; r < 3; ++r) acc += params.output_weights(o, r) * h[r];
      CHECK(f[o] == doctest::Approx(acc).epsilon(1e-12));
    }
  }

  SUBCASE("input size mismatch") {
    const auto params = init_params<double>(c, 1);
    ForwardCache<double> cache;
    std::vector<double> x(19);
    CHECK_THROWS_AS(forward_pass<double>(x, params, cache), ShapeError);
  }

  SUBCASE("infeasible configuration") {
    NetworkConfig bad = c;
    bad.input_window = 3;
    CHECK_THROWS_AS(bad.validate(), ShapeError);
    NetworkConfig one_class = c;
    one_class.num_classes = 1;
    CHECK_THROWS(one_class.validate());
  }
}

TEST_CASE("backward pass") {
  NetworkConfig c;
  c.input_window = 16;
  c.stages = {{3, 1, 2, 2}};
  c.hidden_units = 4;
  c.num_classes = 3;
  auto params = init_params<double>(c, 11);
  Rng rng(11);
  std::vector<double> x(16);
  for (auto& v : x) v = rng.normal();

  SUBCASE("zero score gradient gives zero gradients") {
    ForwardCache<double> cache;
    forward_pass<double>(x, params, cache);
    auto grads = NetworkParams<double>::zeros(c);
    std::vector<double> g(3, 0.0);
    backward_pass<double>(cache, params, g, grads);
    grads.for_each_tensor([](const std::string&, std::vector<std::size_t>, std::span<const double> v) {
      for (double e : v) CHECK(e == 0.0);
    });
  }

  SUBCASE("output weight gradient of a single score is the hidden activation") {
    ForwardCache<double> cache;
    forward_pass<double>(x, params, cache);
    auto grads = NetworkParams<double>::zeros(c);
    std::vector<double> g = {1.0, 0.0, 0.0};
    backward_pass<double>(cache, params, g, grads);
    for (std::size_t r = 0; r < 4; ++r) {
      CHECK(grads.output_weights(0, r) == cache.hidden[r]);
      CHECK(grads.output_weights(1, r) == 0.0);
    }
    CHECK(grads.output_bias == std::vector<double>{1.0, 0.0, 0.0});
  }

  SUBCASE("stale cache is rejected") {
    ForwardCache<double> cache;
    forward_pass<double>(x, params, cache);
    ++params.version;
    auto grads = NetworkParams<double>::zeros(c);
    std::vector<double> g(3, 1.0);
    CHECK_THROWS_AS(backward_pass<double>(cache, params, g, grads), InvariantError);
  }

  SUBCASE("analytic gradients match finite differences") {
    const auto report = check_gradients(params, x, 1, {});
    CHECK(report.passed());
    for (const auto& t : report.tensors) CHECK(t.max_rel_error < 1e-4);
  }
}

TEST_CASE("parameter initialization is seeded") {
  NetworkConfig c;
  c.input_window = 30;
  c.stages = {{5, 2, 4, 2}};
  c.hidden_units = 6;
  c.num_classes = 3;
  CHECK(init_params<float>(c, 1).same_values(init_params<float>(c, 1)));
  CHECK_FALSE(init_params<float>(c, 1).same_values(init_params<float>(c, 2)));
  // The float model is the rounded double model.
  CHECK(init_params<double>(c, 4).cast<float>().same_values(init_params<float>(c, 4)));
}
