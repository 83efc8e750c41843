// include/rawcnn/model_io.hpp
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

#ifndef RAWCNN_MODEL_IO_HPP_
#define RAWCNN_MODEL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rawcnn/matrix.hpp"
#include "rawcnn/nn.hpp"

namespace rawcnn {

/// How frames are produced from an utterance before they reach the network.
struct FrontendConfig {
  std::string input_kind = "raw";  // "raw" or "feat"
  int sample_rate = 16000;
  int hop_samples = 160;
  bool operator==(const FrontendConfig&) const = default;
};

struct Model {
  NetworkConfig config;
  FrontendConfig frontend;
  std::vector<std::string> alphabet;
  std::optional<int> garbage;
  NetworkParams<float> params;
  Matrix<float> transitions;  // crf.A, K x K
};

// Container layout:
//   "RCN1" | uint32 LE header length | UTF-8 JSON header | float32 LE tensors
// The header lists tensors as {name, shape} in the order their values follow.
std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(const std::vector<std::uint8_t>& bytes);
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

nlohmann::json to_json(const NetworkConfig& config);
NetworkConfig network_config_from_json(const nlohmann::json& j);

}  // namespace rawcnn

#endif  // RAWCNN_MODEL_IO_HPP_
