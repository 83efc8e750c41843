// include/rawcnn/data.hpp
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

#ifndef RAWCNN_DATA_HPP_
#define RAWCNN_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rawcnn/eval.hpp"
#include "rawcnn/matrix.hpp"
#include "rawcnn/model_io.hpp"
#include "rawcnn/signal.hpp"

namespace rawcnn {

/// Exactly one of `waveform` / `features` is set. Segment bounds are in
/// samples for waveforms and in frames for feature matrices.
struct LabeledUtterance {
  std::string id;
  std::optional<Waveform> waveform;
  std::optional<FrameMatrix> features;
  SegmentAnnotation segments;

  std::size_t length() const;
};

/// Network-ready frames of one utterance: row t is the flattened input window
/// (input_window x input_dim) for frame t.
struct UtteranceFrames {
  std::string id;
  FrameMatrix inputs;
  std::vector<int> labels;
};

using FrameDataset = std::vector<UtteranceFrames>;

/// Raw input: normalized sample windows on the hop grid. Feature input:
/// `input_window` consecutive feature frames centered on t, zero padded.
UtteranceFrames make_frames(const LabeledUtterance& utt,
                            const FrontendConfig& frontend, int input_window,
                            std::optional<int> garbage);

FrameDataset make_dataset(const std::vector<LabeledUtterance>& utts,
                          const FrontendConfig& frontend, int input_window,
                          std::optional<int> garbage);

// --- synthetic tone corpus ---------------------------------------------

struct SynthSpec {
  int num_classes = 5;
  // Class k uses frequencies[k] when given, otherwise 300 + 400 k Hz. Each
  // segment carries the fundamental plus its second harmonic at half
  // amplitude.
  std::vector<double> frequencies;
  double amplitude = 0.5;
  double noise_sigma = 0.05;
  double min_segment_ms = 60.0;
  double max_segment_ms = 200.0;
  int min_segments = 3;
  int max_segments = 8;
  // Optional K x K non-negative weights; row j is the distribution of the
  // class following class j. Uniform when absent.
  std::optional<Matrix<double>> bigram;
  int sample_rate = 16000;
  std::uint64_t seed = 1;

  double frequency(int k) const;
  /// Throws std::invalid_argument; a Nyquist violation names the frequency.
  void validate() const;
  std::vector<std::string> labels() const;
};

struct SynthCorpus {
  std::vector<std::string> labels;
  std::vector<LabeledUtterance> train;
  std::vector<LabeledUtterance> cv;
  std::vector<LabeledUtterance> test;
};

SynthCorpus synth_corpus(const SynthSpec& spec, int n_train, int n_cv, int n_test);

/// Bigram with weight `boost` on k -> (k+1) mod K, 1 elsewhere, 0 on k -> k.
Matrix<double> cyclic_bigram(int num_classes, double boost);

// --- manifests -----------------------------------------------------------

struct ManifestEntry {
  std::string id;
  std::optional<std::filesystem::path> wav;
  std::optional<std::filesystem::path> feat;
  std::filesystem::path labels;
};

/// JSON lines: {"id": str, "wav": path | "feat": path, "labels": path}.
/// Relative paths resolve against the manifest's directory. Files are not
/// touched until load_utterance.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> parse_manifest(const std::string& text,
                                          const std::filesystem::path& base_dir);

struct LoadOptions {
  int feat_dim = 39;
  int raw_sample_rate = 16000;  // for headerless .f32/.raw waveforms
};

/// Reads only the audio or feature file of an entry; segments stay empty.
LabeledUtterance load_input(const ManifestEntry& entry, const LoadOptions& options = {});

LabeledUtterance load_utterance(const ManifestEntry& entry,
                                const LabelAlphabet& alphabet,
                                const LoadOptions& options = {});

/// Headerless float32 LE, frame-major, `dim` values per frame.
FrameMatrix load_feature_matrix(const std::filesystem::path& path, int dim);

/// Writes `<split>.jsonl` manifests, WAV and label files, and alphabet.txt.
void save_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

/// Label strings of the segments, in order.
std::vector<std::string> segment_labels(const LabeledUtterance& utt,
                                        const std::vector<std::string>& alphabet);

}  // namespace rawcnn

#endif  // RAWCNN_DATA_HPP_
