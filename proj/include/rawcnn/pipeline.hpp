// include/rawcnn/pipeline.hpp
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

#ifndef RAWCNN_PIPELINE_HPP_
#define RAWCNN_PIPELINE_HPP_

// Glue between the network, the decoders and scoring.

#include <optional>
#include <string>
#include <vector>

#include "rawcnn/crf.hpp"
#include "rawcnn/data.hpp"
#include "rawcnn/model_io.hpp"
#include "rawcnn/nn.hpp"

namespace rawcnn {

enum class Decoder { kArgmax, kCrf, kHmm };

Decoder parse_decoder(const std::string& name);
const char* decoder_name(Decoder d);

/// Per-frame softmax of network scores, in double precision.
Matrix<double> posteriors_from_scores(const Matrix<float>& scores);

/// Collapsed label sequence for one utterance.
std::vector<int> decode_scores(const Matrix<float>& scores,
                               const Matrix<float>& transitions, Decoder decoder,
                               int hmm_states = 3);

/// Fits CRF transitions on the frozen network's scores for `data`. The result
/// is rounded to float so that it decodes identically before and after a
/// model round-trip.
Matrix<float> fit_transitions(const NetworkParams<float>& params,
                              const FrameDataset& data,
                              const crf::TrainOptions& options);

struct UtteranceScore {
  std::string id;
  EditCounts counts;
  int ref_length = 0;
  double accuracy = 0.0;
};

struct CorpusScore {
  std::vector<UtteranceScore> utterances;
  long total_ref = 0;
  long total_errors = 0;
  double accuracy() const;
};

/// Reference phoneme sequence of an utterance: its segment labels with runs
/// of identical labels merged.
std::vector<int> reference_sequence(const LabeledUtterance& utt);

/// Decodes every utterance of `data` and scores it against `refs`
/// (same order).
CorpusScore score_decoder(const NetworkParams<float>& params,
                          const Matrix<float>& transitions, const FrameDataset& data,
                          const std::vector<LabeledUtterance>& refs, Decoder decoder,
                          int hmm_states = 3);

}  // namespace rawcnn

#endif  // RAWCNN_PIPELINE_HPP_
