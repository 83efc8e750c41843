// src/model_io.cpp
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

#include "rawcnn/model_io.hpp"

#include <cstring>

#include "rawcnn/binary_io.hpp"
#include "rawcnn/errors.hpp"

namespace rawcnn {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'R', 'C', 'N', '1'};

}  // namespace

json to_json(const NetworkConfig& c) {
  json stages = json::array();
  for (const auto& s : c.stages) {
    stages.push_back({{"kernel_width", s.kernel_width},
                      {"shift", s.shift},
                      {"filters", s.filters},
                      {"pool_width", s.pool_width}});
  }
  return {{"input_window", c.input_window},
          {"input_dim", c.input_dim},
          {"stages", stages},
          {"hidden_units", c.hidden_units},
          {"num_classes", c.num_classes}};
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig c;
  c.input_window = j.at("input_window").get<int>();
  c.input_dim = j.at("input_dim").get<int>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.num_classes = j.at("num_classes").get<int>();
  for (const auto& s : j.at("stages")) {
    c.stages.push_back({s.at("kernel_width").get<int>(), s.at("shift").get<int>(),
                        s.at("filters").get<int>(), s.at("pool_width").get<int>()});
  }
  return c;
}

std::vector<std::uint8_t> serialize_model(const Model& model) {
  const auto k = static_cast<std::size_t>(model.config.num_classes);
  if (model.transitions.rows() != k || model.transitions.cols() != k) {
    throw InvariantError("serialize_model: crf.A must be K x K");
  }
  if (model.alphabet.size() != k) {
    throw InvariantError("serialize_model: alphabet size != num_classes");
  }
  std::vector<std::span<const float>> payload;
  json tensors = json::array();
  model.params.for_each_tensor([&](const std::string& name,
                                   std::vector<std::size_t> shape,
                                   std::span<const float> v) {
    tensors.push_back({{"name", name}, {"shape", shape}});
    payload.push_back(v);
  });
  tensors.push_back({{"name", "crf.A"}, {"shape", {k, k}}});
  payload.push_back(model.transitions.values());

  json header = {{"format", "rawcnn-model"},
                 {"version", 1},
                 {"network", to_json(model.config)},
                 {"frontend",
                  {{"input_kind", model.frontend.input_kind},
                   {"sample_rate", model.frontend.sample_rate},
                   {"hop_samples", model.frontend.hop_samples}}},
                 {"alphabet", model.alphabet},
                 {"garbage", model.garbage ? json(*model.garbage) : json(nullptr)},
                 {"tensors", tensors}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  binary::append<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& v : payload) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    out.insert(out.end(), p, p + v.size() * sizeof(float));
  }
  return out;
}

Model deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("model: bad magic (expected RCN1)");
  }
  const auto len = binary::load<std::uint32_t>(bytes.data() + 4);
  if (8 + static_cast<std::size_t>(len) > bytes.size()) {
    throw FormatError("model: truncated header");
  }
  json header;
  try {
    header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: header is not valid JSON: ") + e.what());
  }

  Model m;
  try {
    m.config = network_config_from_json(header.at("network"));
    const auto& fe = header.at("frontend");
    m.frontend.input_kind = fe.at("input_kind").get<std::string>();
    m.frontend.sample_rate = fe.at("sample_rate").get<int>();
    m.frontend.hop_samples = fe.at("hop_samples").get<int>();
    m.alphabet = header.at("alphabet").get<std::vector<std::string>>();
    if (!header.at("garbage").is_null()) m.garbage = header.at("garbage").get<int>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: malformed header: ") + e.what());
  }
  m.config.validate();
  const auto k = static_cast<std::size_t>(m.config.num_classes);
  if (m.alphabet.size() != k) throw FormatError("model: alphabet size != num_classes");

  m.params = NetworkParams<float>::zeros(m.config);
  m.transitions = Matrix<float>(k, k);
  std::vector<std::pair<std::string, std::span<float>>> slots;
  m.params.for_each_tensor([&](const std::string& name, std::vector<std::size_t>,
                               std::span<float> v) { slots.emplace_back(name, v); });
  slots.emplace_back("crf.A", m.transitions.values());

  const auto& tensors = header.at("tensors");
  if (tensors.size() != slots.size()) {
    throw FormatError("model: expected " + std::to_string(slots.size()) +
                      " tensors, header lists " + std::to_string(tensors.size()));
  }
  std::size_t pos = 8 + len;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& [name, dst] = slots[i];
    const auto& desc = tensors[i];
    std::size_t count = 1;
    for (auto d : desc.at("shape")) count *= d.get<std::size_t>();
    if (desc.at("name").get<std::string>() != name || count != dst.size()) {
      throw FormatError("model: tensor " + std::to_string(i) + " is " +
                        desc.dump() + ", expected " + name + " with " +
                        std::to_string(dst.size()) + " values");
    }
    const std::size_t nbytes = count * sizeof(float);
    if (pos + nbytes > bytes.size()) {
      throw FormatError("model: truncated tensor data for " + name);
    }
    std::memcpy(dst.data(), bytes.data() + pos, nbytes);
    pos += nbytes;
  }
  if (pos != bytes.size()) throw FormatError("model: trailing bytes after tensors");
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  binary::write_file(path, serialize_model(model));
}

Model load_model(const std::filesystem::path& path) {
  return deserialize_model(binary::read_file(path));
}

}  // namespace rawcnn
