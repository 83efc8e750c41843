// src/data.cpp
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

#include "rawcnn/data.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "rawcnn/binary_io.hpp"
#include "rawcnn/errors.hpp"
#include "rawcnn/rng.hpp"

namespace rawcnn {

using nlohmann::json;
namespace fs = std::filesystem;

std::size_t LabeledUtterance::length() const {
  if (waveform) return waveform->samples.size();
  if (features) return features->rows();
  return 0;
}

UtteranceFrames make_frames(const LabeledUtterance& utt,
                            const FrontendConfig& frontend, int input_window,
                            std::optional<int> garbage) {
  if (input_window < 1) throw std::invalid_argument("make_frames: input_window < 1");
  UtteranceFrames out;
  out.id = utt.id;
  if (utt.waveform) {
    const auto grid = FrameGrid::for_length(
        utt.waveform->samples.size(), static_cast<std::size_t>(frontend.hop_samples),
        static_cast<std::size_t>(input_window));
    if (grid.num_frames == 0) {
      throw DataError(utt.id + ": waveform shorter than one hop");
    }
    out.inputs = extract_windows(*utt.waveform, grid);
    out.labels = frame_labels(utt.segments, grid, garbage);
    return out;
  }
  if (!utt.features) throw DataError(utt.id + ": utterance has no input");
  const FrameMatrix& f = *utt.features;
  const std::size_t t_count = f.rows();
  const std::size_t dim = f.cols();
  const auto win = static_cast<std::size_t>(input_window);
  const auto half = static_cast<std::int64_t>(win / 2);
  out.inputs = FrameMatrix(t_count, win * dim);
  for (std::size_t t = 0; t < t_count; ++t) {
    auto row = out.inputs.row(t);
    for (std::size_t c = 0; c < win; ++c) {
      const std::int64_t src = static_cast<std::int64_t>(t) - half + static_cast<std::int64_t>(c);
      if (src < 0 || src >= static_cast<std::int64_t>(t_count)) continue;
      auto in = f.row(static_cast<std::size_t>(src));
      std::copy(in.begin(), in.end(), row.begin() + static_cast<std::ptrdiff_t>(c * dim));
    }
  }
  // One feature frame per grid step: centers fall on t.
  FrameGrid grid{1, win, t_count};
  out.labels = frame_labels(utt.segments, grid, garbage);
  return out;
}

FrameDataset make_dataset(const std::vector<LabeledUtterance>& utts,
                          const FrontendConfig& frontend, int input_window,
                          std::optional<int> garbage) {
  FrameDataset ds;
  ds.reserve(utts.size());
  for (const auto& u : utts) ds.push_back(make_frames(u, frontend, input_window, garbage));
  return ds;
}

// --- synthesis -------------------------------------------------------------

double SynthSpec::frequency(int k) const {
  if (!frequencies.empty()) return frequencies.at(static_cast<std::size_t>(k));
  return 300.0 + 400.0 * k;
}

void SynthSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("synth: need at least 2 classes");
  if (sample_rate <= 0) throw std::invalid_argument("synth: sample rate must be positive");
  if (!frequencies.empty() &&
      frequencies.size() != static_cast<std::size_t>(num_classes)) {
    throw std::invalid_argument("synth: frequency list size != number of classes");
  }
  const double nyquist = sample_rate / 2.0;
  for (int k = 0; k < num_classes; ++k) {
    const double f = frequency(k);
    if (!(f > 0.0)) throw std::invalid_argument("synth: class frequencies must be positive");
    if (2.0 * f >= nyquist) {
      std::ostringstream msg;
      msg << "synth: class " << k << " harmonic at " << 2.0 * f
          << " Hz (fundamental " << f << " Hz) is not below the Nyquist frequency "
          << nyquist << " Hz";
      throw std::invalid_argument(msg.str());
    }
  }
  if (!(min_segment_ms > 0.0) || max_segment_ms < min_segment_ms) {
    throw std::invalid_argument("synth: invalid segment duration range");
  }
  if (min_segments < 1 || max_segments < min_segments) {
    throw std::invalid_argument("synth: invalid segment count range");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("synth: negative noise sigma");
  if (bigram) {
    const auto k = static_cast<std::size_t>(num_classes);
    if (bigram->rows() != k || bigram->cols() != k) {
      throw std::invalid_argument("synth: bigram must be K x K");
    }
    for (std::size_t r = 0; r < k; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        if ((*bigram)(r, c) < 0.0) throw std::invalid_argument("synth: negative bigram weight");
        sum += (*bigram)(r, c);
      }
      if (!(sum > 0.0)) {
        throw std::invalid_argument("synth: bigram row " + std::to_string(r) + " is all zero");
      }
    }
  }
}

std::vector<std::string> SynthSpec::labels() const {
  std::vector<std::string> out;
  for (int k = 0; k < num_classes; ++k) out.push_back("ph" + std::to_string(k));
  return out;
}

Matrix<double> cyclic_bigram(int num_classes, double boost) {
  const auto k = static_cast<std::size_t>(num_classes);
  Matrix<double> m(k, k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    m(i, i) = 0.0;
    m(i, (i + 1) % k) = boost;
  }
  return m;
}

namespace {

int draw_class(Rng& rng, const SynthSpec& spec, std::optional<int> prev) {
  const int k = spec.num_classes;
  if (!prev || !spec.bigram) return static_cast<int>(rng.index(static_cast<std::size_t>(k)));
  auto row = spec.bigram->row(static_cast<std::size_t>(*prev));
  double total = 0.0;
  for (double w : row) total += w;
  double u = rng.uniform01() * total;
  int last_positive = 0;
  for (int c = 0; c < k; ++c) {
    const double w = row[static_cast<std::size_t>(c)];
    if (w <= 0.0) continue;
    last_positive = c;
    if (u < w) return c;
    u -= w;
  }
  return last_positive;
}

LabeledUtterance synth_utterance(Rng& rng, const SynthSpec& spec, std::string id) {
  LabeledUtterance utt;
  utt.id = std::move(id);
  Waveform w;
  w.sample_rate = spec.sample_rate;
  const int n_segments = spec.min_segments +
                         static_cast<int>(rng.index(static_cast<std::size_t>(
                             spec.max_segments - spec.min_segments + 1)));
  std::optional<int> prev;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int s = 0; s < n_segments; ++s) {
    const int cls = draw_class(rng, spec, prev);
    prev = cls;
    const double ms = rng.uniform(spec.min_segment_ms, spec.max_segment_ms);
    const auto len = std::max<std::int64_t>(
        1, std::llround(ms * spec.sample_rate / 1000.0));
    const double f = spec.frequency(cls);
    const double phase1 = rng.uniform(0.0, two_pi);
    const double phase2 = rng.uniform(0.0, two_pi);
    const auto start = static_cast<std::int64_t>(w.samples.size());
    for (std::int64_t n = 0; n < len; ++n) {
      const double t = static_cast<double>(start + n) / spec.sample_rate;
      double x = spec.amplitude * std::sin(two_pi * f * t + phase1) +
                 0.5 * spec.amplitude * std::sin(two_pi * 2.0 * f * t + phase2);
      if (spec.noise_sigma > 0.0) x += spec.noise_sigma * rng.normal();
      w.samples.push_back(static_cast<float>(x));
    }
    utt.segments.push_back({start, start + len, cls});
  }
  utt.waveform = std::move(w);
  return utt;
}

}  // namespace

SynthCorpus synth_corpus(const SynthSpec& spec, int n_train, int n_cv, int n_test) {
  spec.validate();
  if (n_train < 0 || n_cv < 0 || n_test < 0) {
    throw std::invalid_argument("synth: negative utterance count");
  }
  Rng rng(spec.seed);
  SynthCorpus corpus;
  corpus.labels = spec.labels();
  auto fill = [&](std::vector<LabeledUtterance>& out, const char* split, int n) {
    for (int i = 0; i < n; ++i) {
      char id[64];
      std::snprintf(id, sizeof id, "%s-%04d", split, i);
      out.push_back(synth_utterance(rng, spec, id));
    }
  };
  fill(corpus.train, "train", n_train);
  fill(corpus.cv, "cv", n_cv);
  fill(corpus.test, "test", n_test);
  return corpus;
}

// --- manifests --------------------------------------------------------------

std::vector<ManifestEntry> parse_manifest(const std::string& text,
                                          const fs::path& base_dir) {
  std::vector<ManifestEntry> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      throw ParseError("not valid JSON", lineno);
    }
    if (!rec.is_object()) throw ParseError("record must be a JSON object", lineno);
    auto str_field = [&](const char* key) -> std::optional<std::string> {
      if (!rec.contains(key)) return std::nullopt;
      if (!rec[key].is_string()) {
        throw ParseError(std::string("field '") + key + "' must be a string", lineno);
      }
      return rec[key].get<std::string>();
    };
    ManifestEntry e;
    auto id = str_field("id");
    auto labels = str_field("labels");
    auto wav = str_field("wav");
    auto feat = str_field("feat");
    if (!id) throw ParseError("missing 'id' field", lineno);
    if (!labels) throw ParseError("missing 'labels' field", lineno);
    if (wav.has_value() == feat.has_value()) {
      throw ParseError("exactly one of 'wav' or 'feat' is required", lineno);
    }
    e.id = *id;
    e.labels = resolve(*labels);
    if (wav) e.wav = resolve(*wav);
    if (feat) e.feat = resolve(*feat);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  const std::string text = binary::read_text(path);
  try {
    return parse_manifest(text, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), path.string());
  }
}

FrameMatrix load_feature_matrix(const fs::path& path, int dim) {
  if (dim < 1) throw std::invalid_argument("load_feature_matrix: dim must be >= 1");
  const auto bytes = binary::read_file(path);
  const std::size_t frame_bytes = 4 * static_cast<std::size_t>(dim);
  if (bytes.size() % frame_bytes != 0) {
    throw FormatError(path.string() + ": size " + std::to_string(bytes.size()) +
                      " is not divisible by " + std::to_string(frame_bytes) +
                      " (4 bytes x dim " + std::to_string(dim) + ")");
  }
  if (bytes.empty()) {
    throw FormatError(path.string() + ": feature file has no frames");
  }
  FrameMatrix m(bytes.size() / frame_bytes, static_cast<std::size_t>(dim));
  std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

LabeledUtterance load_input(const ManifestEntry& entry, const LoadOptions& options) {
  LabeledUtterance utt;
  utt.id = entry.id;
  if (entry.wav) {
    const auto ext = entry.wav->extension().string();
    if (ext == ".f32" || ext == ".raw") {
      utt.waveform = read_raw_float(*entry.wav, options.raw_sample_rate);
    } else {
      utt.waveform = read_wav(*entry.wav);
    }
  } else if (entry.feat) {
    utt.features = load_feature_matrix(*entry.feat, options.feat_dim);
  }
  return utt;
}

LabeledUtterance load_utterance(const ManifestEntry& entry,
                                const LabelAlphabet& alphabet,
                                const LoadOptions& options) {
  LabeledUtterance utt = load_input(entry, options);
  for (const auto& s : read_label_file(entry.labels)) {
    int label;
    try {
      label = alphabet.index(s.label);
    } catch (const DataError& e) {
      throw DataError(entry.labels.string() + ": " + e.what());
    }
    utt.segments.push_back({s.start, s.end, label});
  }
  try {
    validate_annotation(utt.segments, static_cast<int>(alphabet.size()));
  } catch (const DataError& e) {
    throw DataError(entry.labels.string() + ": " + e.what());
  }
  if (!utt.segments.empty() &&
      utt.segments.back().end > static_cast<std::int64_t>(utt.length())) {
    throw DataError(entry.labels.string() + ": annotation ends at " +
                    std::to_string(utt.segments.back().end) + " beyond input length " +
                    std::to_string(utt.length()));
  }
  return utt;
}

std::vector<std::string> segment_labels(const LabeledUtterance& utt,
                                        const std::vector<std::string>& alphabet) {
  std::vector<std::string> out;
  for (const auto& s : utt.segments) out.push_back(alphabet.at(static_cast<std::size_t>(s.label)));
  return out;
}

void save_corpus(const fs::path& dir, const SynthCorpus& corpus) {
  fs::create_directories(dir / "audio");
  fs::create_directories(dir / "labels");
  auto write_split = [&](const char* name, const std::vector<LabeledUtterance>& utts) {
    std::string manifest;
    for (const auto& u : utts) {
      const std::string wav = "audio/" + u.id + ".wav";
      const std::string lab = "labels/" + u.id + ".txt";
      write_wav(dir / wav, *u.waveform);
      std::vector<TextSegment> segs;
      for (const auto& s : u.segments) {
        segs.push_back({s.start, s.end, corpus.labels.at(static_cast<std::size_t>(s.label))});
      }
      write_label_file(dir / lab, segs);
      manifest += json{{"id", u.id}, {"wav", wav}, {"labels", lab}}.dump() + "\n";
    }
    binary::write_text(dir / (std::string(name) + ".jsonl"), manifest);
  };
  write_split("train", corpus.train);
  write_split("cv", corpus.cv);
  write_split("test", corpus.test);
  std::string alphabet;
  for (const auto& l : corpus.labels) alphabet += l + "\n";
  binary::write_text(dir / "alphabet.txt", alphabet);
}

}  // namespace rawcnn
