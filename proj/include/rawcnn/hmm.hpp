// include/rawcnn/hmm.hpp
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

#ifndef RAWCNN_HMM_HPP_
#define RAWCNN_HMM_HPP_

#include <vector>

#include "rawcnn/matrix.hpp"

namespace rawcnn::hmm {

/// K phonemes x D left-to-right states. State k*D + s belongs to phoneme k.
/// Allowed moves: s -> s+1 inside a phoneme, a self-loop on the last state,
/// and last state of any phoneme -> first state of any phoneme. Paths start
/// in a first state and end in a last state, so every phoneme occupancy
/// lasts at least D frames. All moves score 0.
struct DurationGraph {
  int num_labels = 1;
  int states_per_label = 3;

  int num_states() const { return num_labels * states_per_label; }
  int label_of(int state) const { return state / states_per_label; }
  int position_of(int state) const { return state % states_per_label; }
  /// Ascending state indices that may precede `state`.
  std::vector<int> predecessors(int state) const;
};

DurationGraph build_duration_graph(int num_labels, int states_per_label = 3);

struct DecodeResult {
  std::vector<int> phonemes;      // collapsed label sequence
  std::vector<int> frame_labels;  // label per frame
  double score = 0.0;             // sum of per-frame emission scores
};

/// Viterbi with arbitrary per-frame log scores (T x K). Ties go to the
/// smaller state index. Throws DataError when T < D.
DecodeResult decode_log_scores(const Matrix<double>& log_scores,
                               const DurationGraph& graph);

/// Viterbi with log posteriors as emissions. Rows must sum to 1 within 1e-6.
DecodeResult decode(const Matrix<double>& posteriors, const DurationGraph& graph);

}  // namespace rawcnn::hmm

#endif  // RAWCNN_HMM_HPP_
