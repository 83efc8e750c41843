// tests/test_signal.cpp
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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "rawcnn/errors.hpp"
#include "rawcnn/rng.hpp"
#include "rawcnn/signal.hpp"

using namespace rawcnn;
namespace fs = std::filesystem;

namespace {

Waveform ramp(std::size_t n) {
  Waveform w;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(static_cast<float>(i) / static_cast<float>(n));
  return w;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "rawcnn_test_signal";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("window normalization examples") {
  const auto a = normalize_window(std::vector<double>{1, 2, 3});
  CHECK(a[0] == doctest::Approx(-1.224745).epsilon(1e-6));
  CHECK(a[1] == doctest::Approx(0.0));
  CHECK(a[2] == doctest::Approx(1.224745).epsilon(1e-6));

  CHECK(normalize_window(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0, 0});
  CHECK(normalize_window(std::vector<double>{0, 1}) == std::vector<double>{-1, 1});
  CHECK_THROWS_AS(normalize_window(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("normalization is idempotent and invariant to positive affine maps") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(1 + rng.index(40));
    for (auto& v : x) v = rng.normal();
    if (x.size() == 1) x.push_back(x[0] + 1.0);
    const auto once = normalize_window(x);
    const auto twice = normalize_window(once);
    const double a = 0.1 + 10.0 * rng.uniform01();
    const double b = rng.uniform(-5.0, 5.0);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const auto ny = normalize_window(y);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(once[i] - twice[i]) < 1e-6);
      CHECK(std::abs(once[i] - ny[i]) < 1e-6);
    }
  }
}

TEST_CASE("frame extraction counts and centers") {
  const auto one_second = extract_windows(ramp(16000), FrameGrid::for_length(16000, 160, 4320));
  CHECK(one_second.rows() == 100);
  CHECK(one_second.cols() == 4320);

  // Window of one sample: each frame is the normalized single sample, and a
  // single value normalizes to 0, so check the grid centers instead.
  const auto grid = FrameGrid::for_length(480, 160, 1);
  CHECK(grid.num_frames == 3);
  CHECK(grid.center(0) == 80);
  CHECK(grid.center(1) == 240);
  CHECK(grid.center(2) == 400);

  const auto whole = FrameGrid::for_length(777, 777, 5);
  CHECK(whole.num_frames == 1);

  for (std::size_t len : {160u, 161u, 999u, 3200u}) {
    for (std::size_t window : {1u, 7u, 400u, 4320u}) {
      CHECK(extract_windows(ramp(len), FrameGrid::for_length(len, 160, window)).rows() == len / 160);
    }
  }
}

TEST_CASE("frame windows are zero padded before normalization") {
  Waveform w;
  w.samples = {1.0f, 2.0f, 3.0f, 4.0f};
  // hop 4, window 8: center 2, window covers samples -2..5.
  const auto frames = extract_windows(w, FrameGrid::for_length(4, 4, 8));
  REQUIRE(frames.rows() == 1);
  const auto expected = normalize_window(std::vector<float>{0, 0, 1, 2, 3, 4, 0, 0});
  for (std::size_t i = 0; i < 8; ++i) CHECK(frames(0, i) == doctest::Approx(expected[i]));
}

TEST_CASE("frame labels") {
  const auto grid = FrameGrid::for_length(640, 160, 1);
  SegmentAnnotation ann = {{0, 320, 0}, {320, 640, 1}};
  CHECK(frame_labels(ann, grid) == std::vector<int>{0, 0, 1, 1});

  const auto short_grid = FrameGrid::for_length(480, 160, 1);
  CHECK(frame_labels({{0, 100, 0}}, short_grid, 7) == std::vector<int>{0, 7, 7});
  CHECK(frame_labels({}, short_grid, 7) == std::vector<int>{7, 7, 7});
  CHECK_THROWS(frame_labels({{0, 100, 0}}, short_grid));
}

TEST_CASE("frame label count always matches the grid") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t len = 160 + rng.index(5000);
    const auto grid = FrameGrid::for_length(len, 160, 1 + rng.index(500));
    CHECK(frame_labels({}, grid, 0).size() == grid.num_frames);
  }
}

TEST_CASE("annotation validation") {
  CHECK_NOTHROW(validate_annotation({{0, 10, 0}, {10, 20, 1}}, 2));
  CHECK_THROWS(validate_annotation({{5, 5, 0}}, 2));
  CHECK_THROWS(validate_annotation({{0, 10, 0}, {5, 20, 1}}, 2));
  CHECK_THROWS(validate_annotation({{0, 10, 2}}, 2));
}

TEST_CASE("wav round trip") {
  Waveform w;
  w.sample_rate = 8000;
  for (int i = 0; i < 100; ++i) w.samples.push_back(static_cast<float>(std::sin(0.1 * i) * 0.5));
  const auto path = scratch("tone.wav");
  write_wav(path, w);
  const auto back = read_wav(path);
  CHECK(back.sample_rate == 8000);
  REQUIRE(back.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - w.samples[i]) < 1.0 / 32768.0 + 1e-7);
  }
}

TEST_CASE("malformed inputs are rejected") {
  const auto path = scratch("junk.wav");
  {
    std::ofstream out(path, std::ios::binary);
    out << "definitely not a RIFF file";
  }
  CHECK_THROWS_AS(read_wav(path), DataError);
  CHECK_THROWS_AS(read_wav(scratch("missing.wav")), DataError);

  CHECK_THROWS_AS(parse_label_text("0 10\n"), ParseError);
  CHECK_THROWS_AS(parse_label_text("0 10 a extra\n"), ParseError);
  CHECK_THROWS_AS(parse_label_text("10 5 a\n"), ParseError);
  try {
    parse_label_text("0 5 a\n\nbad line\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  const auto segs = parse_label_text("0 5 a\r\n5 9 b\n");
  REQUIRE(segs.size() == 2);
  CHECK(segs[1] == TextSegment{5, 9, "b"});
}

TEST_CASE("raw float waveforms") {
  const auto path = scratch("x.f32");
  {
    std::ofstream out(path, std::ios::binary);
    const float v[3] = {0.25f, -0.5f, 0.125f};
    out.write(reinterpret_cast<const char*>(v), sizeof v);
  }
  const auto w = read_raw_float(path, 16000);
  CHECK(w.samples == std::vector<float>{0.25f, -0.5f, 0.125f});
  {
    std::ofstream out(path, std::ios::binary);
    out << "abc";
  }
  CHECK_THROWS_AS(read_raw_float(path, 16000), DataError);
}
