// include/rawcnn/signal.hpp
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

#ifndef RAWCNN_SIGNAL_HPP_
#define RAWCNN_SIGNAL_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rawcnn/matrix.hpp"

namespace rawcnn {

struct Waveform {
  std::vector<float> samples;  // nominally in [-1, 1)
  int sample_rate = 16000;
};

/// Regular analysis grid. Frame t is centered on sample t*hop + hop/2.
struct FrameGrid {
  std::size_t hop_samples = 160;
  std::size_t window_samples = 1;
  std::size_t num_frames = 0;

  static FrameGrid for_length(std::size_t length, std::size_t hop,
                              std::size_t window);
  std::size_t center(std::size_t t) const {
    return t * hop_samples + hop_samples / 2;
  }
};

struct Segment {
  std::int64_t start = 0;  // inclusive
  std::int64_t end = 0;    // exclusive
  int label = 0;
  bool operator==(const Segment&) const = default;
};

/// Sorted, non-overlapping segments.
using SegmentAnnotation = std::vector<Segment>;

/// Throws DataError if the annotation violates ordering/overlap invariants or
/// uses a label outside [0, num_labels).
void validate_annotation(const SegmentAnnotation& ann, int num_labels);

/// Zero mean, unit population variance. A constant window maps to zeros.
template <typename T>
void normalize_window_inplace(std::span<T> window) {
  if (window.empty()) {
    throw std::invalid_argument("normalize_window: empty window");
  }
  const double n = static_cast<double>(window.size());
  double mean = 0.0;
  for (T v : window) mean += static_cast<double>(v);
  mean /= n;
  double var = 0.0;
  for (T v : window) {
    const double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  var /= n;
  if (!(var > 1e-24)) {
    std::fill(window.begin(), window.end(), T{0});
    return;
  }
  const double inv_std = 1.0 / std::sqrt(var);
  for (T& v : window) {
    v = static_cast<T>((static_cast<double>(v) - mean) * inv_std);
  }
}

template <typename T>
std::vector<T> normalize_window(std::span<const T> window) {
  std::vector<T> out(window.begin(), window.end());
  normalize_window_inplace(std::span<T>(out));
  return out;
}

template <typename T>
std::vector<T> normalize_window(const std::vector<T>& window) {
  return normalize_window(std::span<const T>(window));
}

/// One normalized window per grid frame, zero padding beyond the waveform.
FrameMatrix extract_windows(const Waveform& w, const FrameGrid& grid);

/// Label of the segment containing each frame center; uncovered centers get
/// `garbage`, or raise a DataError naming the frame when none is configured.
std::vector<int> frame_labels(const SegmentAnnotation& ann,
                              const FrameGrid& grid,
                              std::optional<int> garbage = std::nullopt);

// --- file formats --------------------------------------------------------

/// RIFF/WAVE, 16-bit PCM, mono. Samples are divided by 32768.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& w);

/// Headerless little-endian float32 samples.
Waveform read_raw_float(const std::filesystem::path& path, int sample_rate);

struct TextSegment {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::string label;
  bool operator==(const TextSegment&) const = default;
};

/// `start end label` per line; blank lines are ignored.
std::vector<TextSegment> read_label_file(const std::filesystem::path& path);
std::vector<TextSegment> parse_label_text(const std::string& text);
void write_label_file(const std::filesystem::path& path,
                      const std::vector<TextSegment>& segments);

}  // namespace rawcnn

#endif  // RAWCNN_SIGNAL_HPP_
