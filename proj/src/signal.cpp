// src/signal.cpp
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

#include "rawcnn/signal.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "rawcnn/binary_io.hpp"
#include "rawcnn/errors.hpp"

namespace rawcnn {

FrameGrid FrameGrid::for_length(std::size_t length, std::size_t hop,
                                std::size_t window) {
  if (hop == 0) throw std::invalid_argument("FrameGrid: hop must be positive");
  if (window == 0) {
    throw std::invalid_argument("FrameGrid: window must be positive");
  }
  return FrameGrid{hop, window, length / hop};
}

void validate_annotation(const SegmentAnnotation& ann, int num_labels) {
  std::int64_t prev_end = 0;
  for (std::size_t i = 0; i < ann.size(); ++i) {
    const Segment& s = ann[i];
    if (s.start < 0 || s.start >= s.end) {
      throw DataError("segment " + std::to_string(i) + ": invalid span [" +
                      std::to_string(s.start) + ", " + std::to_string(s.end) +
                      ")");
    }
    if (i > 0 && s.start < prev_end) {
      throw DataError("segment " + std::to_string(i) +
                      " overlaps or is out of order");
    }
    if (s.label < 0 || s.label >= num_labels) {
      throw DataError("segment " + std::to_string(i) + ": label " +
                      std::to_string(s.label) + " outside alphabet");
    }
    prev_end = s.end;
  }
}

FrameMatrix extract_windows(const Waveform& w, const FrameGrid& grid) {
  const std::size_t length = w.samples.size();
  const std::size_t half = grid.window_samples / 2;
  const std::size_t padded = length + 2 * half;
  if (grid.window_samples > padded) {
    throw std::invalid_argument("extract_windows: window of " +
                                std::to_string(grid.window_samples) +
                                " samples exceeds padded length " +
                                std::to_string(padded));
  }
  if (grid.num_frames != length / grid.hop_samples) {
    throw std::invalid_argument("extract_windows: grid does not match waveform");
  }
  FrameMatrix out(grid.num_frames, grid.window_samples);
  for (std::size_t t = 0; t < grid.num_frames; ++t) {
    const auto first = static_cast<std::int64_t>(grid.center(t)) -
                       static_cast<std::int64_t>(half);
    auto row = out.row(t);
    for (std::size_t k = 0; k < grid.window_samples; ++k) {
      const std::int64_t s = first + static_cast<std::int64_t>(k);
      row[k] = (s >= 0 && s < static_cast<std::int64_t>(length))
                   ? w.samples[static_cast<std::size_t>(s)]
                   : 0.0f;
    }
    normalize_window_inplace(row);
  }
  return out;
}

std::vector<int> frame_labels(const SegmentAnnotation& ann,
                              const FrameGrid& grid,
                              std::optional<int> garbage) {
  std::vector<int> labels(grid.num_frames);
  std::size_t seg = 0;
  for (std::size_t t = 0; t < grid.num_frames; ++t) {
    const auto c = static_cast<std::int64_t>(grid.center(t));
    while (seg < ann.size() && ann[seg].end <= c) ++seg;
    if (seg < ann.size() && ann[seg].start <= c) {
      labels[t] = ann[seg].label;
    } else if (garbage) {
      labels[t] = *garbage;
    } else {
      throw DataError("frame " + std::to_string(t) + " (center sample " +
                      std::to_string(c) +
                      ") is not covered by any segment and no garbage label "
                      "is configured");
    }
  }
  return labels;
}

namespace {

struct Chunk {
  std::string id;
  std::size_t offset = 0;
  std::size_t size = 0;
};

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  const auto bytes = binary::read_file(path);
  auto fail = [&](const std::string& why) {
    return FormatError(path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  std::optional<Chunk> fmt, data;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    Chunk c{std::string(reinterpret_cast<const char*>(&bytes[pos]), 4),
            pos + 8, binary::load<std::uint32_t>(&bytes[pos + 4])};
    if (c.offset + c.size > bytes.size()) {
      // Tolerate a truncated trailing data chunk.
      c.size = bytes.size() - c.offset;
    }
    if (c.id == "fmt ") fmt = c;
    if (c.id == "data") data = c;
    pos = c.offset + c.size + (c.size & 1);
  }
  if (!fmt || fmt->size < 16) throw fail("missing fmt chunk");
  if (!data) throw fail("missing data chunk");
  const std::uint8_t* f = &bytes[fmt->offset];
  const auto format = binary::load<std::uint16_t>(f);
  const auto channels = binary::load<std::uint16_t>(f + 2);
  const auto rate = binary::load<std::uint32_t>(f + 4);
  const auto bits = binary::load<std::uint16_t>(f + 14);
  if (format != 1) throw fail("only PCM is supported");
  if (channels != 1) throw fail("only mono is supported");
  if (bits != 16) throw fail("only 16-bit samples are supported");
  if (rate == 0) throw fail("zero sample rate");

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  const std::size_t n = data->size / 2;
  if (n == 0) throw fail("no samples");
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = binary::load<std::int16_t>(&bytes[data->offset + 2 * i]);
    w.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return w;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * n);
  auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  tag("RIFF");
  binary::append<std::uint32_t>(out, 36 + 2 * n);
  tag("WAVE");
  tag("fmt ");
  binary::append<std::uint32_t>(out, 16);
  binary::append<std::uint16_t>(out, 1);
  binary::append<std::uint16_t>(out, 1);
  binary::append<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate));
  binary::append<std::uint32_t>(out,
                                static_cast<std::uint32_t>(w.sample_rate) * 2);
  binary::append<std::uint16_t>(out, 2);
  binary::append<std::uint16_t>(out, 16);
  tag("data");
  binary::append<std::uint32_t>(out, 2 * n);
  for (float x : w.samples) {
    const float scaled = std::nearbyint(x * 32768.0f);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0f, 32767.0f));
    binary::append<std::int16_t>(out, v);
  }
  binary::write_file(path, out);
}

Waveform read_raw_float(const std::filesystem::path& path, int sample_rate) {
  if (sample_rate <= 0) {
    throw std::invalid_argument("read_raw_float: sample rate must be positive");
  }
  const auto bytes = binary::read_file(path);
  if (bytes.empty() || bytes.size() % 4 != 0) {
    throw FormatError(path.string() +
                      ": raw float file size must be a positive multiple of 4");
  }
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(bytes.size() / 4);
  std::memcpy(w.samples.data(), bytes.data(), bytes.size());
  return w;
}

std::vector<TextSegment> parse_label_text(const std::string& text) {
  std::vector<TextSegment> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ls(line);
    TextSegment s;
    std::string extra;
    if (!(ls >> s.start >> s.end >> s.label)) {
      throw ParseError("expected `start end label`", lineno);
    }
    if (ls >> extra) throw ParseError("trailing fields", lineno);
    if (s.start < 0 || s.end <= s.start) {
      throw ParseError("invalid segment span", lineno);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TextSegment> read_label_file(const std::filesystem::path& path) {
  try {
    return parse_label_text(binary::read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), path.string());
  }
}

void write_label_file(const std::filesystem::path& path,
                      const std::vector<TextSegment>& segments) {
  std::ostringstream out;
  for (const auto& s : segments) {
    out << s.start << ' ' << s.end << ' ' << s.label << '\n';
  }
  binary::write_text(path, out.str());
}

}  // namespace rawcnn
