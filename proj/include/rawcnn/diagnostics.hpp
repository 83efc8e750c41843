// include/rawcnn/diagnostics.hpp
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

#ifndef RAWCNN_DIAGNOSTICS_HPP_
#define RAWCNN_DIAGNOSTICS_HPP_

// Model inspection and verification tools: first-layer filter spectra,
// finite-difference gradient checks and the pooling ablation.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rawcnn/data.hpp"
#include "rawcnn/matrix.hpp"
#include "rawcnn/model_io.hpp"
#include "rawcnn/nn.hpp"
#include "rawcnn/rng.hpp"
#include "rawcnn/train.hpp"

namespace rawcnn {

// --- filter spectra --------------------------------------------------------

/// Magnitude of the zero-padded DFT of every filter of a d_in = 1 conv layer,
/// one row per filter, bins 0 .. n_fft/2.
Matrix<double> filter_spectra(const ConvLayerParams<float>& layer, int n_fft);

/// Rows `filter,bin,frequency_hz,magnitude`.
std::string filter_spectra_csv(const Matrix<double>& spectra, int sample_rate,
                               int n_fft);

/// Bin of the largest magnitude per filter (lowest bin on ties).
std::vector<int> spectral_peaks(const Matrix<double>& spectra);

// --- gradient check ----------------------------------------------------------

struct GradCheckOptions {
  double epsilon = 1e-4;
  double tolerance = 1e-4;
  // Denominator floor of the relative error. Below it the O(eps^2)
  // truncation error of the difference quotient dominates the comparison.
  double floor = 1e-5;
  bool check_input = true;
  // Test hook: perturbs the analytic gradient of the named tensor so the
  // check is seen to fail.
  std::optional<std::string> corrupt_tensor;
};

struct TensorCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // pooling argmax changed inside +-epsilon
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  bool passed() const;
};

/// Central finite differences of -log p(target | window) against the
/// analytic gradient, for every parameter and (optionally) every input value.
GradCheckReport check_gradients(const NetworkParams<double>& params,
                                std::span<const double> window, int target,
                                const GradCheckOptions& options = {});

/// Random raw-input network with 1-3 stages, at most 8 filters per stage and
/// an input window of at most 64 samples.
NetworkConfig random_small_config(Rng& rng);

std::string grad_check_csv(const GradCheckReport& report);

// --- pooling ablation --------------------------------------------------------

/// Variant of a 3-stage base with `pools` pooling layers: the pool widths of
/// the last 3 - pools stages are set to 1. The input window and the
/// remaining hyper-parameters are kept. Throws ShapeError when the variant
/// has no valid shape.
NetworkConfig ablation_config(const NetworkConfig& base, int pools);

struct AblationRow {
  int pools = 0;
  NetworkConfig config;
  std::int64_t params = 0;
  double cv_frame_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::optional<std::string> error;
};

struct AblationData {
  const FrameDataset* train = nullptr;
  const FrameDataset* cv = nullptr;
  const FrameDataset* test = nullptr;
  const std::vector<LabeledUtterance>* test_refs = nullptr;
};

/// Rows for 0, 1, 2 and 3 pooling layers. Each variant is trained with `tc`
/// and scored on the test set with the HMM decoder. Per-row failures are
/// recorded in `error` and the sweep continues.
std::vector<AblationRow> ablate_pooling(const AblationData& data,
                                        const NetworkConfig& base,
                                        const TrainConfig& tc, int hmm_states = 3);

std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace rawcnn

#endif  // RAWCNN_DIAGNOSTICS_HPP_
