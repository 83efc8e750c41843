// src/eval.cpp
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

#include "rawcnn/eval.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "rawcnn/binary_io.hpp"
#include "rawcnn/errors.hpp"

namespace rawcnn {

LabelAlphabet::LabelAlphabet(std::vector<std::string> labels,
                             std::optional<std::string> garbage)
    : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw DataError("alphabet: duplicate label '" + labels_[i] + "'");
    }
  }
  if (garbage) {
    auto it = index_.find(*garbage);
    if (it == index_.end()) {
      throw DataError("alphabet: garbage label '" + *garbage + "' not in alphabet");
    }
    garbage_ = it->second;
  }
}

std::optional<int> LabelAlphabet::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int LabelAlphabet::index(const std::string& symbol) const {
  const std::string* label = &symbol;
  if (!mapping_.empty()) {
    auto m = mapping_.find(symbol);
    if (m == mapping_.end()) {
      throw DataError("label '" + symbol + "' is not in the mapping table");
    }
    label = &m->second;
  }
  if (auto i = find(*label)) return *i;
  throw DataError("label '" + *label + "' is not in the alphabet");
}

void LabelAlphabet::set_mapping(std::map<std::string, std::string> mapping) {
  for (const auto& [src, dst] : mapping) {
    if (!find(dst)) {
      throw DataError("mapping target '" + dst + "' (from '" + src +
                      "') is not in the alphabet");
    }
  }
  mapping_ = std::move(mapping);
}

std::map<std::string, std::string> read_mapping_file(const std::filesystem::path& path) {
  std::istringstream in(binary::read_text(path));
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string src, dst, extra;
    if (!(ls >> src)) continue;
    if (!(ls >> dst) || (ls >> extra)) {
      throw ParseError("expected `source target`", lineno, path.string());
    }
    if (!out.emplace(src, dst).second) {
      throw ParseError("duplicate source label '" + src + "'", lineno, path.string());
    }
  }
  return out;
}

std::vector<std::string> read_alphabet_file(const std::filesystem::path& path) {
  std::istringstream in(binary::read_text(path));
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> map_labels(const std::vector<std::string>& seq,
                                    const std::map<std::string, std::string>& mapping) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (const auto& s : seq) {
    auto it = mapping.find(s);
    if (it == mapping.end()) {
      throw DataError("label '" + s + "' is not in the mapping table");
    }
    out.push_back(it->second);
  }
  return out;
}

template <typename T>
EditCounts align(const std::vector<T>& ref, const std::vector<T>& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  EditCounts c;
  c.distance = at(n, m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        (same ? c.matches : c.substitutions)++;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

template <typename T>
double phoneme_accuracy(const std::vector<T>& ref, const std::vector<T>& hyp) {
  if (ref.empty()) throw std::invalid_argument("phoneme_accuracy: empty reference");
  const double n = static_cast<double>(ref.size());
  return 100.0 * (n - align(ref, hyp).distance) / n;
}

double frame_accuracy(const std::vector<int>& ref, const std::vector<int>& hyp) {
  if (ref.size() != hyp.size()) {
    throw std::invalid_argument("frame_accuracy: length mismatch (" +
                                std::to_string(ref.size()) + " vs " +
                                std::to_string(hyp.size()) + ")");
  }
  if (ref.empty()) return 0.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) same += ref[i] == hyp[i];
  return 100.0 * static_cast<double>(same) / static_cast<double>(ref.size());
}

template EditCounts align(const std::vector<int>&, const std::vector<int>&);
template EditCounts align(const std::vector<std::string>&, const std::vector<std::string>&);
template double phoneme_accuracy(const std::vector<int>&, const std::vector<int>&);
template double phoneme_accuracy(const std::vector<std::string>&,
                                 const std::vector<std::string>&);

}  // namespace rawcnn
