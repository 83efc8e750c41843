// src/pipeline.cpp
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

#include "rawcnn/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "rawcnn/errors.hpp"
#include "rawcnn/eval.hpp"
#include "rawcnn/hmm.hpp"
#include "rawcnn/train.hpp"

namespace rawcnn {

Decoder parse_decoder(const std::string& name) {
  if (name == "argmax") return Decoder::kArgmax;
  if (name == "crf") return Decoder::kCrf;
  if (name == "hmm") return Decoder::kHmm;
  throw UsageError("unknown decoder '" + name + "' (expected crf, hmm or argmax)");
}

const char* decoder_name(Decoder d) {
  switch (d) {
    case Decoder::kArgmax: return "argmax";
    case Decoder::kCrf: return "crf";
    case Decoder::kHmm: return "hmm";
  }
  return "?";
}

Matrix<double> posteriors_from_scores(const Matrix<float>& scores) {
  Matrix<double> out(scores.rows(), scores.cols());
  std::vector<double> row(scores.cols());
  for (std::size_t t = 0; t < scores.rows(); ++t) {
    auto r = scores.row(t);
    std::copy(r.begin(), r.end(), row.begin());
    const auto p = softmax<double>(row);
    std::copy(p.begin(), p.end(), out.row(t).begin());
  }
  return out;
}

std::vector<int> decode_scores(const Matrix<float>& scores,
                               const Matrix<float>& transitions, Decoder decoder,
                               int hmm_states) {
  switch (decoder) {
    case Decoder::kArgmax:
      return collapse_path(argmax_rows(scores));
    case Decoder::kCrf:
      return collapse_path(
          crf::viterbi(scores.cast<double>(), transitions.cast<double>()).path);
    case Decoder::kHmm: {
      const auto graph =
          hmm::build_duration_graph(static_cast<int>(scores.cols()), hmm_states);
      return hmm::decode(posteriors_from_scores(scores), graph).phonemes;
    }
  }
  throw std::logic_error("decode_scores: unknown decoder");
}

Matrix<float> fit_transitions(const NetworkParams<float>& params,
                              const FrameDataset& data,
                              const crf::TrainOptions& options) {
  std::vector<crf::Example> examples;
  examples.reserve(data.size());
  for (const auto& u : data) {
    if (u.labels.empty()) continue;
    examples.push_back({compute_scores(params, u.inputs).cast<double>(), u.labels});
  }
  return crf::train_transitions(examples, options, params.config.num_classes)
      .cast<float>();
}

double CorpusScore::accuracy() const {
  if (total_ref == 0) return 0.0;
  return 100.0 * static_cast<double>(total_ref - total_errors) /
         static_cast<double>(total_ref);
}

std::vector<int> reference_sequence(const LabeledUtterance& utt) {
  std::vector<int> labels;
  for (const auto& s : utt.segments) labels.push_back(s.label);
  return collapse_path(labels);
}

CorpusScore score_decoder(const NetworkParams<float>& params,
                          const Matrix<float>& transitions, const FrameDataset& data,
                          const std::vector<LabeledUtterance>& refs, Decoder decoder,
                          int hmm_states) {
  if (data.size() != refs.size()) {
    throw std::invalid_argument("score_decoder: data/reference size mismatch");
  }
  CorpusScore out;
  for (std::size_t u = 0; u < data.size(); ++u) {
    const auto ref = reference_sequence(refs[u]);
    if (ref.empty()) continue;
    const auto hyp = decode_scores(compute_scores(params, data[u].inputs), transitions,
                                   decoder, hmm_states);
    UtteranceScore s;
    s.id = data[u].id;
    s.counts = align(ref, hyp);
    s.ref_length = static_cast<int>(ref.size());
    s.accuracy = 100.0 * (s.ref_length - s.counts.distance) / s.ref_length;
    out.total_ref += s.ref_length;
    out.total_errors += s.counts.distance;
    out.utterances.push_back(std::move(s));
  }
  return out;
}

}  // namespace rawcnn
