// include/rawcnn/eval.hpp
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

#ifndef RAWCNN_EVAL_HPP_
#define RAWCNN_EVAL_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rawcnn {

/// Ordered label set with an optional garbage class and an optional
/// many-to-one mapping from source symbols (e.g. 61 phones) to labels.
class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  explicit LabelAlphabet(std::vector<std::string> labels,
                         std::optional<std::string> garbage = std::nullopt);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int index) const { return labels_.at(static_cast<std::size_t>(index)); }
  std::optional<int> garbage() const { return garbage_; }

  /// Index of `symbol` after applying the mapping (if any). Throws DataError
  /// naming the symbol when it is unknown.
  int index(const std::string& symbol) const;
  std::optional<int> find(const std::string& label) const;

  void set_mapping(std::map<std::string, std::string> mapping);
  const std::map<std::string, std::string>& mapping() const { return mapping_; }
  bool has_mapping() const { return !mapping_.empty(); }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, int> index_;
  std::optional<int> garbage_;
  std::map<std::string, std::string> mapping_;
};

/// `source target` per line.
std::map<std::string, std::string> read_mapping_file(const std::filesystem::path& path);
/// One label per line.
std::vector<std::string> read_alphabet_file(const std::filesystem::path& path);

/// Applies the many-to-one table elementwise; unmapped symbols raise a
/// DataError naming the symbol.
std::vector<std::string> map_labels(const std::vector<std::string>& seq,
                                    const std::map<std::string, std::string>& mapping);

/// Merges maximal runs of identical labels. When `strip` is set, tokens equal
/// to it are removed after merging.
template <typename T>
std::vector<T> collapse_path(const std::vector<T>& frames,
                             std::optional<T> strip = std::nullopt) {
  std::vector<T> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0 && frames[i] == frames[i - 1]) continue;
    if (strip && frames[i] == *strip) continue;
    out.push_back(frames[i]);
  }
  return out;
}

/// Counts from one minimal alignment. The distance is unique, the breakdown
/// is not; ties in the backtrace prefer match > substitution > deletion >
/// insertion.
struct EditCounts {
  int distance = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int matches = 0;
};

template <typename T>
EditCounts align(const std::vector<T>& ref, const std::vector<T>& hyp);

/// 100 * (N - E) / N with N = |ref| and E the Levenshtein distance.
template <typename T>
double phoneme_accuracy(const std::vector<T>& ref, const std::vector<T>& hyp);

/// Percentage of equal positions.
double frame_accuracy(const std::vector<int>& ref, const std::vector<int>& hyp);

}  // namespace rawcnn

#endif  // RAWCNN_EVAL_HPP_
