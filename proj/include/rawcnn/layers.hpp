// include/rawcnn/layers.hpp
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

#ifndef RAWCNN_LAYERS_HPP_
#define RAWCNN_LAYERS_HPP_

// Layer kernels. Two implementations with identical signatures:
//
//   rawcnn::serial    plain loops, the reference used by tests
//   rawcnn::parallel  OpenMP work-sharing over output rows plus `omp simd`
//                     reductions in the inner dot products
//
// Each output element is produced by exactly one thread in a fixed order, so
// the parallel kernels are deterministic for a given build. They differ from
// the serial reference only by floating-point reassociation inside simd
// reductions. All gradient kernels accumulate (+=) into their outputs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rawcnn/errors.hpp"
#include "rawcnn/matrix.hpp"

namespace rawcnn {

/// One temporal convolution: output frame j is
/// weights * concat(x[j*shift], ..., x[j*shift + kernel_width - 1]) + bias.
template <typename S>
struct ConvLayerParams {
  int kernel_width = 1;
  int shift = 1;
  int input_dim = 1;
  int output_dim = 1;
  Matrix<S> weights;  // output_dim x (kernel_width * input_dim)
  std::vector<S> bias;

  ConvLayerParams() = default;
  ConvLayerParams(int kw, int dw, int d_in, int d_out)
      : kernel_width(kw),
        shift(dw),
        input_dim(d_in),
        output_dim(d_out),
        weights(static_cast<std::size_t>(d_out),
                static_cast<std::size_t>(kw) * static_cast<std::size_t>(d_in)),
        bias(static_cast<std::size_t>(d_out)) {}

  std::size_t patch_size() const { return weights.cols(); }
};

inline std::size_t conv_output_frames(std::size_t frames, int kw, int dw) {
  if (frames < static_cast<std::size_t>(kw)) return 0;
  return (frames - static_cast<std::size_t>(kw)) / static_cast<std::size_t>(dw) +
         1;
}

namespace detail {

template <typename S>
void check_conv(const Matrix<S>& x, const ConvLayerParams<S>& p) {
  if (x.cols() != static_cast<std::size_t>(p.input_dim)) {
    throw ShapeError("conv: input dimension " + std::to_string(x.cols()) +
                     " != " + std::to_string(p.input_dim));
  }
  if (x.rows() < static_cast<std::size_t>(p.kernel_width)) {
    throw ShapeError("conv: " + std::to_string(x.rows()) +
                     " frames < kernel width " +
                     std::to_string(p.kernel_width));
  }
}

template <typename S>
void check_pool(const Matrix<S>& x, int width) {
  if (width < 1) throw ShapeError("maxpool: width must be >= 1");
  if (x.rows() < static_cast<std::size_t>(width)) {
    throw ShapeError("maxpool: " + std::to_string(x.rows()) +
                     " frames < pool width " + std::to_string(width));
  }
}

}  // namespace detail

namespace serial {

template <typename S>
void conv_forward(const Matrix<S>& x, const ConvLayerParams<S>& p,
                  Matrix<S>& out) {
  detail::check_conv(x, p);
  const std::size_t frames = conv_output_frames(x.rows(), p.kernel_width, p.shift);
  const std::size_t patch = p.patch_size();
  out.resize(frames, static_cast<std::size_t>(p.output_dim));
  for (std::size_t j = 0; j < frames; ++j) {
    const S* in = x.data() + j * static_cast<std::size_t>(p.shift) * x.cols();
    for (std::size_t o = 0; o < out.cols(); ++o) {
      const S* w = p.weights.data() + o * patch;
      S acc = p.bias[o];
      for (std::size_t k = 0; k < patch; ++k) acc += w[k] * in[k];
      out(j, o) = acc;
    }
  }
}

/// grad_x may be null when the input gradient is not needed.
template <typename S>
void conv_backward(const Matrix<S>& x, const ConvLayerParams<S>& p,
                   const Matrix<S>& grad_out, ConvLayerParams<S>& grad,
                   Matrix<S>* grad_x) {
  const std::size_t patch = p.patch_size();
  const std::size_t step = static_cast<std::size_t>(p.shift) * x.cols();
  if (grad_x) {
    grad_x->resize(x.rows(), x.cols());
    grad_x->fill(S{0});
  }
  for (std::size_t j = 0; j < grad_out.rows(); ++j) {
    const S* in = x.data() + j * step;
    for (std::size_t o = 0; o < grad_out.cols(); ++o) {
      const S g = grad_out(j, o);
      S* gw = grad.weights.data() + o * patch;
      for (std::size_t k = 0; k < patch; ++k) gw[k] += g * in[k];
      grad.bias[o] += g;
      if (grad_x) {
        const S* w = p.weights.data() + o * patch;
        S* gx = grad_x->data() + j * step;
        for (std::size_t k = 0; k < patch; ++k) gx[k] += g * w[k];
      }
    }
  }
}

/// Non-overlapping max over `width` frames; trailing frames are dropped.
/// argmax[j*d + i] holds the winning input frame (first maximum on ties).
template <typename S>
void maxpool_forward(const Matrix<S>& x, int width, Matrix<S>& out,
                     std::vector<std::uint32_t>& argmax) {
  detail::check_pool(x, width);
  const std::size_t w = static_cast<std::size_t>(width);
  const std::size_t frames = x.rows() / w;
  const std::size_t d = x.cols();
  out.resize(frames, d);
  argmax.resize(frames * d);
  for (std::size_t j = 0; j < frames; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      std::size_t best = j * w;
      for (std::size_t s = j * w + 1; s < (j + 1) * w; ++s) {
        if (x(s, i) > x(best, i)) best = s;
      }
      out(j, i) = x(best, i);
      argmax[j * d + i] = static_cast<std::uint32_t>(best);
    }
  }
}

template <typename S>
void maxpool_backward(const Matrix<S>& grad_out,
                      const std::vector<std::uint32_t>& argmax,
                      std::size_t input_frames, Matrix<S>& grad_in) {
  const std::size_t d = grad_out.cols();
  grad_in.resize(input_frames, d);
  grad_in.fill(S{0});
  for (std::size_t j = 0; j < grad_out.rows(); ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      grad_in(argmax[j * d + i], i) += grad_out(j, i);
    }
  }
}

/// y = W x + b
template <typename S>
void dense_forward(const Matrix<S>& w, std::span<const S> b,
                   std::span<const S> x, std::span<S> y) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const S* wr = w.data() + r * w.cols();
    S acc = b[r];
    for (std::size_t c = 0; c < w.cols(); ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

/// gW += gy x^T, gb += gy, gx = W^T gy (gx overwritten; may be empty).
template <typename S>
void dense_backward(const Matrix<S>& w, std::span<const S> x,
                    std::span<const S> gy, Matrix<S>& gw, std::span<S> gb,
                    std::span<S> gx) {
  const std::size_t cols = w.cols();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    S* g = gw.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) g[c] += gy[r] * x[c];
    gb[r] += gy[r];
  }
  if (gx.empty()) return;
  std::fill(gx.begin(), gx.end(), S{0});
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const S* wr = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) gx[c] += gy[r] * wr[c];
  }
}

}  // namespace serial

namespace parallel {

// Below this many multiply-adds a parallel region costs more than it saves.
inline constexpr std::size_t kMinParallelWork = std::size_t{1} << 16;

template <typename S>
void conv_forward(const Matrix<S>& x, const ConvLayerParams<S>& p,
                  Matrix<S>& out) {
  detail::check_conv(x, p);
  const std::size_t frames = conv_output_frames(x.rows(), p.kernel_width, p.shift);
  const std::size_t patch = p.patch_size();
  const std::size_t d_out = static_cast<std::size_t>(p.output_dim);
  const std::size_t step = static_cast<std::size_t>(p.shift) * x.cols();
  out.resize(frames, d_out);
  const S* xd = x.data();
  const S* wd = p.weights.data();
  S* od = out.data();
  const auto total = static_cast<std::int64_t>(frames * d_out);
#pragma omp parallel for schedule(static) if (frames * d_out * patch > kMinParallelWork)
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const std::size_t j = static_cast<std::size_t>(idx) / d_out;
    const std::size_t o = static_cast<std::size_t>(idx) % d_out;
    const S* in = xd + j * step;
    const S* w = wd + o * patch;
    S acc = S{0};
#pragma omp simd reduction(+ : acc)
    for (std::size_t k = 0; k < patch; ++k) acc += w[k] * in[k];
    od[idx] = acc + p.bias[o];
  }
}

template <typename S>
void conv_backward(const Matrix<S>& x, const ConvLayerParams<S>& p,
                   const Matrix<S>& grad_out, ConvLayerParams<S>& grad,
                   Matrix<S>* grad_x) {
  const std::size_t patch = p.patch_size();
  const std::size_t step = static_cast<std::size_t>(p.shift) * x.cols();
  const std::size_t frames = grad_out.rows();
  const std::size_t d_out = grad_out.cols();
  const auto outputs = static_cast<std::int64_t>(d_out);
  // Weight gradient: each filter row is owned by one thread.
#pragma omp parallel for schedule(static) if (frames * d_out * patch > kMinParallelWork)
  for (std::int64_t oi = 0; oi < outputs; ++oi) {
    const auto o = static_cast<std::size_t>(oi);
    S* gw = grad.weights.data() + o * patch;
    S gb = S{0};
    for (std::size_t j = 0; j < frames; ++j) {
      const S g = grad_out(j, o);
      if (g == S{0}) continue;
      const S* in = x.data() + j * step;
#pragma omp simd
      for (std::size_t k = 0; k < patch; ++k) gw[k] += g * in[k];
      gb += g;
    }
    grad.bias[o] += gb;
  }
  if (!grad_x) return;
  grad_x->resize(x.rows(), x.cols());
  grad_x->fill(S{0});
  // Input gradient: patches overlap when shift < kernel width, so the frame
  // loop stays sequential.
  for (std::size_t j = 0; j < frames; ++j) {
    S* gx = grad_x->data() + j * step;
    for (std::size_t o = 0; o < d_out; ++o) {
      const S g = grad_out(j, o);
      if (g == S{0}) continue;
      const S* w = p.weights.data() + o * patch;
#pragma omp simd
      for (std::size_t k = 0; k < patch; ++k) gx[k] += g * w[k];
    }
  }
}

template <typename S>
void maxpool_forward(const Matrix<S>& x, int width, Matrix<S>& out,
                     std::vector<std::uint32_t>& argmax) {
  // Memory bound; the serial loop is already as fast as it gets.
  serial::maxpool_forward(x, width, out, argmax);
}

template <typename S>
void maxpool_backward(const Matrix<S>& grad_out,
                      const std::vector<std::uint32_t>& argmax,
                      std::size_t input_frames, Matrix<S>& grad_in) {
  serial::maxpool_backward(grad_out, argmax, input_frames, grad_in);
}

template <typename S>
void dense_forward(const Matrix<S>& w, std::span<const S> b,
                   std::span<const S> x, std::span<S> y) {
  const std::size_t cols = w.cols();
  const auto rows = static_cast<std::int64_t>(w.rows());
  const S* xd = x.data();
#pragma omp parallel for schedule(static) if (w.size() > kMinParallelWork)
  for (std::int64_t ri = 0; ri < rows; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    const S* wr = w.data() + r * cols;
    S acc = S{0};
#pragma omp simd reduction(+ : acc)
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * xd[c];
    y[r] = acc + b[r];
  }
}

template <typename S>
void dense_backward(const Matrix<S>& w, std::span<const S> x,
                    std::span<const S> gy, Matrix<S>& gw, std::span<S> gb,
                    std::span<S> gx) {
  const std::size_t cols = w.cols();
  const auto rows = static_cast<std::int64_t>(w.rows());
  const S* xd = x.data();
#pragma omp parallel for schedule(static) if (w.size() > kMinParallelWork)
  for (std::int64_t ri = 0; ri < rows; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    const S g = gy[r];
    gb[r] += g;
    if (g == S{0}) continue;
    S* gr = gw.data() + r * cols;
#pragma omp simd
    for (std::size_t c = 0; c < cols; ++c) gr[c] += g * xd[c];
  }
  if (gx.empty()) return;
  std::fill(gx.begin(), gx.end(), S{0});
  S* gxd = gx.data();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const S g = gy[r];
    if (g == S{0}) continue;
    const S* wr = w.data() + r * cols;
#pragma omp simd
    for (std::size_t c = 0; c < cols; ++c) gxd[c] += g * wr[c];
  }
}

}  // namespace parallel
}  // namespace rawcnn

#endif  // RAWCNN_LAYERS_HPP_
