// tests/test_eval.cpp
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

#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rawcnn/errors.hpp"
#include "rawcnn/eval.hpp"
#include "rawcnn/rng.hpp"

using namespace rawcnn;
using Seq = std::vector<std::string>;

namespace {

// Textbook quadratic dynamic program.
int edit_distance_table(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

std::vector<int> random_seq(Rng& rng, std::size_t max_len, std::size_t alphabet) {
  std::vector<int> s(rng.index(max_len + 1));
  for (auto& v : s) v = static_cast<int>(rng.index(alphabet));
  return s;
}

}  // namespace

TEST_CASE("label mapping") {
  CHECK(map_labels({"x", "y"}, {{"x", "x"}, {"y", "y"}}) == Seq{"x", "y"});
  CHECK(map_labels({"x", "y", "x"}, {{"x", "a"}, {"y", "a"}}) == Seq{"a", "a", "a"});
  CHECK_THROWS_AS(map_labels({"z"}, {{"x", "a"}}), DataError);

  LabelAlphabet alphabet({"a", "b", "sil"}, "sil");
  CHECK(alphabet.index("b") == 1);
  CHECK(alphabet.garbage() == 2);
  alphabet.set_mapping({{"aa", "a"}, {"ao", "a"}, {"h#", "sil"}});
  CHECK(alphabet.index("ao") == 0);
  CHECK(alphabet.index("h#") == 2);
  CHECK_THROWS_AS(alphabet.index("b"), DataError);
  CHECK_THROWS_AS(alphabet.set_mapping({{"q", "missing"}}), DataError);
  CHECK_THROWS_AS(LabelAlphabet({"a", "a"}), DataError);
  CHECK_THROWS_AS(LabelAlphabet({"a"}, "g"), DataError);
}

TEST_CASE("path collapsing") {
  CHECK(collapse_path(Seq{"a", "a", "b", "b", "b", "a"}) == Seq{"a", "b", "a"});
  CHECK(collapse_path(Seq{"a"}) == Seq{"a"});
  CHECK(collapse_path(Seq{"a", "g", "g", "b"}, std::optional<std::string>("g")) == Seq{"a", "b"});
  CHECK(collapse_path(Seq{}).empty());

  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_seq(rng, 15, 3);
    const auto once = collapse_path(s);
    CHECK(collapse_path(once) == once);
  }
}

TEST_CASE("phoneme accuracy") {
  CHECK(phoneme_accuracy(Seq{"a", "b", "c"}, Seq{"a", "c"}) == doctest::Approx(200.0 / 3.0));
  CHECK(phoneme_accuracy(Seq{"a", "b"}, Seq{"a", "b", "b"}) == 50.0);
  CHECK(phoneme_accuracy(Seq{"a", "b"}, Seq{"a", "b"}) == 100.0);
  CHECK(phoneme_accuracy(Seq{"a", "b"}, Seq{}) == 0.0);
  CHECK(phoneme_accuracy(Seq{"a"}, Seq{"b", "c", "d"}) == -200.0);
  CHECK_THROWS(phoneme_accuracy(Seq{}, Seq{"a"}));

  const auto counts = align(Seq{"a", "b", "c", "d"}, Seq{"a", "x", "d", "e"});
  CHECK(counts.distance == 3);
  CHECK(counts.substitutions + counts.deletions + counts.insertions == 3);
}

TEST_CASE("edit distance agrees with two independent references") {
  Rng rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_seq(rng, 12, 4);
    const auto b = random_seq(rng, 12, 4);
    const auto c = align(a, b);
    CHECK(c.distance == edit_distance_table(a, b));
    CHECK(c.distance == oracle::levenshtein(a, b));
    CHECK(c.substitutions + c.deletions + c.insertions == c.distance);
    CHECK(c.matches + c.substitutions + c.deletions == static_cast<int>(a.size()));
    CHECK(c.matches + c.substitutions + c.insertions == static_cast<int>(b.size()));
  }
}

TEST_CASE("accuracy properties") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    auto ref = random_seq(rng, 10, 5);
    if (ref.empty()) ref.push_back(0);
    const auto hyp = random_seq(rng, 10, 5);
    CHECK(phoneme_accuracy(ref, ref) == 100.0);
    std::vector<int> perm = {0, 1, 2, 3, 4};
    rng.shuffle(perm.begin(), perm.end());
    auto rename = [&](std::vector<int> s) {
      for (auto& v : s) v = perm[static_cast<std::size_t>(v)];
      return s;
    };
    CHECK(phoneme_accuracy(rename(ref), rename(hyp)) == phoneme_accuracy(ref, hyp));
  }
}

TEST_CASE("frame accuracy") {
  CHECK(frame_accuracy({1, 2, 3}, {1, 2, 3}) == 100.0);
  CHECK(frame_accuracy({1, 2}, {3, 4}) == 0.0);
  CHECK(frame_accuracy({1, 2, 3, 4}, {1, 0, 3, 0}) == 50.0);
  CHECK_THROWS(frame_accuracy({1, 2}, {1}));
}
