// src/cli.cpp
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

#include "rawcnn/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "rawcnn/binary_io.hpp"
#include "rawcnn/data.hpp"
#include "rawcnn/diagnostics.hpp"
#include "rawcnn/errors.hpp"
#include "rawcnn/eval.hpp"
#include "rawcnn/model_io.hpp"
#include "rawcnn/pipeline.hpp"
#include "rawcnn/train.hpp"

namespace rawcnn::cli {

namespace fs = std::filesystem;

std::vector<StageConfig> parse_stages(const std::string& text) {
  std::vector<StageConfig> stages;
  if (text.find_first_not_of(" \t") == std::string::npos) return stages;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    std::stringstream fields(item);
    std::string f;
    std::vector<int> v;
    while (std::getline(fields, f, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stoi(f, &used));
        if (f.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(f);
      } catch (const std::exception&) {
        throw UsageError("stage spec '" + item + "': '" + f + "' is not an integer");
      }
    }
    if (v.size() != 4) {
      throw UsageError("stage spec '" + item + "' must be kW,dW,filters,pool");
    }
    if (*std::min_element(v.begin(), v.end()) < 1) {
      throw UsageError("stage spec '" + item + "': every value must be >= 1");
    }
    stages.push_back({v[0], v[1], v[2], v[3]});
  }
  return stages;
}

std::string format_stages(const std::vector<StageConfig>& stages) {
  std::string s;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& st = stages[i];
    if (i) s += ';';
    s += std::to_string(st.kernel_width) + "," + std::to_string(st.shift) + "," +
         std::to_string(st.filters) + "," + std::to_string(st.pool_width);
  }
  return s;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string f;
  while (std::getline(in, f, ',')) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, double>) {
        out.push_back(std::stod(f, &used));
      } else {
        out.push_back(static_cast<T>(std::stoll(f, &used)));
      }
      if (f.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(f);
    } catch (const std::exception&) {
      throw UsageError(what + ": '" + f + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

// Converts configuration validation failures into usage errors, since they
// stem from flags or config files rather than from the data.
template <typename F>
void as_usage(F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const ShapeError& e) {
    throw UsageError(e.what());
  }
}

// --- option groups -----------------------------------------------------------

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string out;
};

void add_common(CLI::App* app, CommonOpts& o, bool out_required) {
  app->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  auto* out = app->add_option("--out", o.out, "Output directory");
  if (out_required) out->required();
}

struct NetOpts {
  int window = 800;
  std::string stages = "64,4,30,3;5,1,30,3;3,1,30,3";
  int hidden = 100;
};

void add_net(CLI::App* app, NetOpts& o) {
  app->add_option("--window", o.window,
                  "Input window in samples (raw input) or feature frames")
      ->capture_default_str();
  app->add_option("--stages", o.stages,
                  "Filter stages as kW,dW,filters,pool;... (empty for none)")
      ->capture_default_str();
  app->add_option("--hidden", o.hidden, "Hidden units")->capture_default_str();
}

struct DataOpts {
  std::string alphabet;
  std::string map;
  std::string garbage;
  int feat_dim = 39;
  int sample_rate = 16000;
  int hop = 160;
};

void add_data(CLI::App* app, DataOpts& o) {
  app->add_option("--alphabet", o.alphabet,
                  "Label list, one per line (default: sorted training labels)");
  app->add_option("--map", o.map, "Label mapping file: 'source target' per line");
  app->add_option("--garbage", o.garbage, "Label assigned to frames outside any segment");
  app->add_option("--feat-dim", o.feat_dim, "Feature dimension of .feat inputs")
      ->capture_default_str();
  app->add_option("--sample-rate", o.sample_rate,
                  "Expected sample rate; also used for headerless float audio")
      ->capture_default_str();
  app->add_option("--hop", o.hop, "Frame hop in samples for raw input")
      ->capture_default_str();
}

struct TrainOpts {
  double lr = 0.01;
  int epochs = 10;
  int patience = 3;
  bool no_shuffle = false;
  std::string select = "accuracy";
};

void add_train(CLI::App* app, TrainOpts& o) {
  app->add_option("--lr", o.lr, "Learning rate")->capture_default_str();
  app->add_option("--epochs", o.epochs, "Maximum epochs")->capture_default_str();
  app->add_option("--patience", o.patience, "Epochs without cv improvement before stopping")
      ->capture_default_str();
  app->add_flag("--no-shuffle", o.no_shuffle, "Visit training frames in corpus order");
  app->add_option("--select", o.select, "Model selection metric: accuracy or loglik")
      ->capture_default_str();
}

TrainConfig make_train_config(const TrainOpts& o, std::uint64_t seed) {
  TrainConfig tc;
  tc.learning_rate = o.lr;
  tc.max_epochs = o.epochs;
  tc.patience = o.patience;
  tc.seed = seed;
  tc.shuffle = !o.no_shuffle;
  if (o.select == "accuracy") {
    tc.selection = SelectionMetric::kFrameAccuracy;
  } else if (o.select == "loglik") {
    tc.selection = SelectionMetric::kLogLikelihood;
  } else {
    throw UsageError("--select must be accuracy or loglik");
  }
  as_usage([&] { tc.validate(); });
  return tc;
}

// --- corpus loading ----------------------------------------------------------

LabelAlphabet resolve_alphabet(const DataOpts& o,
                               const std::vector<ManifestEntry>& train_entries) {
  std::map<std::string, std::string> mapping;
  if (!o.map.empty()) mapping = read_mapping_file(o.map);
  std::vector<std::string> labels;
  if (!o.alphabet.empty()) {
    labels = read_alphabet_file(o.alphabet);
  } else {
    std::set<std::string> seen;
    for (const auto& e : train_entries) {
      std::vector<std::string> raw;
      for (const auto& s : read_label_file(e.labels)) raw.push_back(s.label);
      if (!mapping.empty()) raw = map_labels(raw, mapping);
      seen.insert(raw.begin(), raw.end());
    }
    if (!o.garbage.empty()) seen.insert(o.garbage);
    labels.assign(seen.begin(), seen.end());
  }
  if (labels.size() < 2) {
    throw DataError("alphabet has " + std::to_string(labels.size()) +
                    " label(s); at least 2 are needed");
  }
  LabelAlphabet alphabet(labels, o.garbage.empty() ? std::nullopt
                                                   : std::optional<std::string>(o.garbage));
  if (!mapping.empty()) alphabet.set_mapping(std::move(mapping));
  return alphabet;
}

std::string input_kind(const std::vector<ManifestEntry>& entries, const fs::path& source) {
  std::string kind;
  for (const auto& e : entries) {
    const std::string k = e.wav ? "raw" : "feat";
    if (!kind.empty() && k != kind) {
      throw DataError(source.string() + ": manifest mixes waveform and feature inputs");
    }
    kind = k;
  }
  return kind;
}

FrontendConfig make_frontend(const DataOpts& o, const std::string& kind) {
  FrontendConfig fe;
  fe.input_kind = kind.empty() ? "raw" : kind;
  fe.sample_rate = o.sample_rate;
  fe.hop_samples = o.hop;
  if (fe.sample_rate < 1 || fe.hop_samples < 1) {
    throw UsageError("--sample-rate and --hop must be positive");
  }
  return fe;
}

LoadOptions load_options(const DataOpts& o) {
  LoadOptions lo;
  lo.feat_dim = o.feat_dim;
  lo.raw_sample_rate = o.sample_rate;
  return lo;
}

void check_rate(const LabeledUtterance& u, const FrontendConfig& fe) {
  if (u.waveform && u.waveform->sample_rate != fe.sample_rate) {
    throw DataError(u.id + ": sample rate " + std::to_string(u.waveform->sample_rate) +
                    " Hz differs from the configured " + std::to_string(fe.sample_rate) +
                    " Hz");
  }
}

std::vector<LabeledUtterance> load_all(const std::vector<ManifestEntry>& entries,
                                       const LabelAlphabet& alphabet,
                                       const LoadOptions& lo, const FrontendConfig& fe) {
  std::vector<LabeledUtterance> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    out.push_back(load_utterance(e, alphabet, lo));
    check_rate(out.back(), fe);
  }
  return out;
}

struct Corpus {
  LabelAlphabet alphabet;
  FrontendConfig frontend;
  std::vector<LabeledUtterance> train, cv, test;
};

Corpus load_corpus(const DataOpts& d, const std::string& train_path,
                   const std::string& cv_path, const std::string& test_path) {
  Corpus c;
  const auto train_entries = load_manifest(train_path);
  if (train_entries.empty()) throw DataError(train_path + ": manifest is empty");
  const auto cv_entries = load_manifest(cv_path);
  if (cv_entries.empty()) throw DataError(cv_path + ": manifest is empty");
  std::vector<ManifestEntry> test_entries;
  if (!test_path.empty()) test_entries = load_manifest(test_path);

  const auto kind = input_kind(train_entries, train_path);
  auto same_kind = [&](const std::vector<ManifestEntry>& entries, const std::string& path) {
    if (!entries.empty() && input_kind(entries, path) != kind) {
      throw DataError(path + ": input kind differs from the training manifest");
    }
  };
  same_kind(cv_entries, cv_path);
  same_kind(test_entries, test_path);
  c.alphabet = resolve_alphabet(d, train_entries);
  c.frontend = make_frontend(d, kind);
  const auto lo = load_options(d);
  c.train = load_all(train_entries, c.alphabet, lo, c.frontend);
  c.cv = load_all(cv_entries, c.alphabet, lo, c.frontend);
  c.test = load_all(test_entries, c.alphabet, lo, c.frontend);
  return c;
}

NetworkConfig make_network(const NetOpts& n, const DataOpts& d, const Corpus& c) {
  NetworkConfig cfg;
  cfg.input_window = n.window;
  cfg.input_dim = c.frontend.input_kind == "feat" ? d.feat_dim : 1;
  cfg.stages = parse_stages(n.stages);
  cfg.hidden_units = n.hidden;
  cfg.num_classes = static_cast<int>(c.alphabet.size());
  as_usage([&] { cfg.validate(); });
  return cfg;
}

// --- output helpers ----------------------------------------------------------

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": cannot create output directory: " + ec.message());
  return dir;
}

// The resolved options of the subcommand, in a form --config accepts.
void echo_config(const CLI::App& sub, const fs::path& dir) {
  binary::write_text(dir / "resolved_config.toml",
                     "[" + sub.get_name() + "]\n" + sub.config_to_str(true, false));
}

std::string utterance_file(const fs::path& dir, const std::string& id) {
  if (id.empty() || id.find_first_of("/\\") != std::string::npos || id == "." || id == "..") {
    throw DataError("utterance id '" + id + "' cannot be used as a file name");
  }
  return (dir / (id + ".txt")).string();
}

std::vector<std::string> read_tokens(const fs::path& path) {
  std::istringstream in(binary::read_text(path));
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// --- subcommands -------------------------------------------------------------

struct SynthOpts {
  CommonOpts common;
  int n_train = 200, n_cv = 40, n_test = 40;
  int classes = 5;
  std::string freqs;
  double amplitude = 0.5;
  double noise = 0.05;
  double min_seg_ms = 60.0, max_seg_ms = 200.0;
  int min_segs = 3, max_segs = 8;
  double bigram_boost = 0.0;
  int sample_rate = 16000;
};

int cmd_synth(const SynthOpts& o, const CLI::App& sub, std::ostream& out) {
  SynthSpec spec;
  spec.num_classes = o.classes;
  if (!o.freqs.empty()) spec.frequencies = parse_list<double>(o.freqs, "--freqs");
  spec.amplitude = o.amplitude;
  spec.noise_sigma = o.noise;
  spec.min_segment_ms = o.min_seg_ms;
  spec.max_segment_ms = o.max_seg_ms;
  spec.min_segments = o.min_segs;
  spec.max_segments = o.max_segs;
  spec.sample_rate = o.sample_rate;
  spec.seed = o.common.seed;
  if (o.n_train < 0 || o.n_cv < 0 || o.n_test < 0) {
    throw UsageError("utterance counts must be non-negative");
  }
  as_usage([&] {
    if (o.bigram_boost > 0.0) spec.bigram = cyclic_bigram(spec.num_classes, o.bigram_boost);
    spec.validate();
  });
  const auto dir = prepare_out(o.common.out);
  const auto corpus = synth_corpus(spec, o.n_train, o.n_cv, o.n_test);
  save_corpus(dir, corpus);
  echo_config(sub, dir);
  out << "wrote " << corpus.train.size() << "/" << corpus.cv.size() << "/"
      << corpus.test.size() << " train/cv/test utterances to " << dir.string() << "\n";
  return kExitOk;
}

struct TrainCmdOpts {
  CommonOpts common;
  NetOpts net;
  DataOpts data;
  TrainOpts train;
  std::string train_manifest, cv_manifest;
  double crf_lr = 0.1;
  int crf_epochs = 20;
};

int cmd_train(const TrainCmdOpts& o, const CLI::App& sub, std::ostream& out) {
  const auto tc = make_train_config(o.train, o.common.seed);
  (void)parse_stages(o.net.stages);
  if (o.crf_epochs < 0 || !(o.crf_lr >= 0.0)) {
    throw UsageError("--crf-epochs and --crf-lr must be non-negative");
  }
  const auto corpus = load_corpus(o.data, o.train_manifest, o.cv_manifest, "");
  const auto config = make_network(o.net, o.data, corpus);
  const auto garbage = corpus.alphabet.garbage();
  const auto train_ds = make_dataset(corpus.train, corpus.frontend, config.input_window, garbage);
  const auto cv_ds = make_dataset(corpus.cv, corpus.frontend, config.input_window, garbage);

  const auto result = train_network(train_ds, cv_ds, config, tc);
  Model model;
  model.config = config;
  model.frontend = corpus.frontend;
  model.alphabet = corpus.alphabet.labels();
  model.garbage = garbage;
  model.params = result.params;
  crf::TrainOptions co;
  co.learning_rate = o.crf_lr;
  co.epochs = o.crf_epochs;
  co.seed = mix_seed(o.common.seed, 2);
  model.transitions = fit_transitions(model.params, train_ds, co);

  const auto dir = prepare_out(o.common.out);
  save_model(dir / "model.rcn", model);
  binary::write_text(dir / "history.csv", history_csv(result.history));
  echo_config(sub, dir);
  for (const auto& h : result.history) {
    out << "epoch " << h.epoch << " train_ll " << fmt("%.6f", h.train_log_likelihood)
        << " cv_acc " << fmt("%.4f", h.cv_frame_accuracy) << "\n";
  }
  out << "best epoch " << result.best_epoch << ", " << param_count(config)
      << " parameters, model written to " << (dir / "model.rcn").string() << "\n";
  return kExitOk;
}

struct GridCmdOpts {
  CommonOpts common;
  NetOpts net;
  DataOpts data;
  TrainOpts train;
  std::string train_manifest, cv_manifest;
  std::string windows_ms, kernel_widths, filters, hidden, pools;
  std::size_t max_configs = 0;
  bool parallel = false;
};

int cmd_grid(const GridCmdOpts& o, const CLI::App& sub, std::ostream& out) {
  const auto tc = make_train_config(o.train, o.common.seed);
  const auto stages = parse_stages(o.net.stages);
  GridSpec grid = GridSpec::table_defaults(static_cast<int>(stages.size()));
  if (!o.windows_ms.empty()) grid.window_ms = parse_list<double>(o.windows_ms, "--windows-ms");
  if (!o.kernel_widths.empty()) {
    grid.kernel_widths.clear();
    std::stringstream in(o.kernel_widths);
    std::string item;
    while (std::getline(in, item, ';')) {
      grid.kernel_widths.push_back(parse_list<int>(item, "--kernel-widths"));
    }
  }
  if (!o.filters.empty()) grid.filters = parse_list<int>(o.filters, "--filters");
  if (!o.hidden.empty()) grid.hidden_units = parse_list<int>(o.hidden, "--hidden-units");
  if (!o.pools.empty()) grid.pool_widths = parse_list<int>(o.pools, "--pools");
  if (o.max_configs > 0) grid.max_configs = o.max_configs;
  as_usage([&] {
    grid.validate();
    if (grid.kernel_widths.size() != stages.size()) {
      throw std::invalid_argument("--kernel-widths needs one list per stage (" +
                                  std::to_string(stages.size()) + ")");
    }
  });

  const auto corpus = load_corpus(o.data, o.train_manifest, o.cv_manifest, "");
  NetworkConfig base;
  base.input_window = o.net.window;
  base.input_dim = corpus.frontend.input_kind == "feat" ? o.data.feat_dim : 1;
  base.stages = stages;
  base.hidden_units = o.net.hidden;
  base.num_classes = static_cast<int>(corpus.alphabet.size());

  const auto results = grid_search(corpus.train, corpus.cv, grid, base, corpus.frontend,
                                   corpus.alphabet.garbage(), tc, o.parallel);
  const auto dir = prepare_out(o.common.out);
  binary::write_text(dir / "grid.csv", grid_csv(results));
  echo_config(sub, dir);
  out << results.size() << " configurations, results in " << (dir / "grid.csv").string()
      << "\n";
  if (!results.empty() && !results.front().error) {
    const auto& best = results.front();
    out << "best: window " << fmt("%g", best.candidate.window_ms) << " ms, stages "
        << format_stages(best.candidate.config.stages) << ", hidden "
        << best.candidate.config.hidden_units << ", cv_acc "
        << fmt("%.4f", best.cv_accuracy) << "\n";
  }
  return kExitOk;
}

struct DecodeOpts {
  CommonOpts common;
  std::string test_manifest, model;
  std::string decoder = "crf";
  int hmm_states = 3;
  std::string map;
};

int cmd_decode(const DecodeOpts& o, const CLI::App& sub, std::ostream& out,
               std::ostream& err) {
  const Decoder decoder = parse_decoder(o.decoder);
  if (o.hmm_states < 1) throw UsageError("--hmm-states must be >= 1");
  const Model model = load_model(o.model);
  const auto entries = load_manifest(o.test_manifest);
  LoadOptions lo;
  lo.feat_dim = model.config.input_dim;
  lo.raw_sample_rate = model.frontend.sample_rate;
  const auto dir = prepare_out(o.common.out);

  std::string log = "id,status,frames,tokens,message\n";
  std::size_t failures = 0;
  for (const auto& e : entries) {
    std::string status = "ok", message;
    std::size_t frames = 0, tokens = 0;
    try {
      const auto path = utterance_file(dir, e.id);
      LabeledUtterance utt = load_input(e, lo);
      check_rate(utt, model.frontend);
      // Labels are not needed here; every frame gets a placeholder.
      const auto f = make_frames(utt, model.frontend, model.config.input_window, 0);
      frames = f.inputs.rows();
      const auto scores = compute_scores(model.params, f.inputs);
      const auto hyp = decode_scores(scores, model.transitions, decoder, o.hmm_states);
      std::string text;
      for (std::size_t i = 0; i < hyp.size(); ++i) {
        if (i) text += ' ';
        text += model.alphabet.at(static_cast<std::size_t>(hyp[i]));
      }
      binary::write_text(path, text + "\n");
      tokens = hyp.size();
    } catch (const DivergenceError&) {
      throw;
    } catch (const std::exception& ex) {
      status = "error";
      message = ex.what();
      ++failures;
      err << "decode: " << e.id << ": " << message << "\n";
    }
    log += csv_field(e.id) + "," + status + "," + std::to_string(frames) + "," +
           std::to_string(tokens) + "," + csv_field(message) + "\n";
  }
  binary::write_text(dir / "decode.csv", log);
  echo_config(sub, dir);
  out << "decoded " << entries.size() - failures << " of " << entries.size()
      << " utterances with " << decoder_name(decoder) << "\n";
  return kExitOk;
}

struct EvalOpts {
  CommonOpts common;
  std::string ref_manifest, hyp_dir, map, strip;
};

int cmd_eval(const EvalOpts& o, const CLI::App& sub, std::ostream& out) {
  std::map<std::string, std::string> mapping;
  if (!o.map.empty()) mapping = read_mapping_file(o.map);
  const auto entries = load_manifest(o.ref_manifest);
  const fs::path hyp_dir(o.hyp_dir);
  if (!fs::is_directory(hyp_dir)) throw IoError(hyp_dir.string() + ": not a directory");
  const std::optional<std::string> strip =
      o.strip.empty() ? std::nullopt : std::optional<std::string>(o.strip);

  std::string csv = "id,ref_length,errors,substitutions,deletions,insertions,accuracy\n";
  long total_n = 0, total_e = 0;
  std::size_t missing = 0;
  for (const auto& e : entries) {
    std::vector<std::string> ref;
    for (const auto& s : read_label_file(e.labels)) ref.push_back(s.label);
    if (!mapping.empty()) ref = map_labels(ref, mapping);
    ref = collapse_path(ref, strip);
    const auto hyp_path = utterance_file(hyp_dir, e.id);
    std::vector<std::string> hyp;
    if (fs::exists(hyp_path)) {
      hyp = collapse_path(read_tokens(hyp_path), strip);
    } else {
      ++missing;
    }
    const auto counts = align(ref, hyp);
    total_n += static_cast<long>(ref.size());
    total_e += counts.distance;
    csv += csv_field(e.id) + "," + std::to_string(ref.size()) + "," +
           std::to_string(counts.distance) + "," + std::to_string(counts.substitutions) +
           "," + std::to_string(counts.deletions) + "," + std::to_string(counts.insertions) +
           "," + (ref.empty() ? std::string() : fmt("%.4f", phoneme_accuracy(ref, hyp))) +
           "\n";
  }
  const double acc = total_n > 0 ? 100.0 * static_cast<double>(total_n - total_e) /
                                       static_cast<double>(total_n)
                                 : 0.0;
  csv += "TOTAL," + std::to_string(total_n) + "," + std::to_string(total_e) + ",,,," +
         (total_n > 0 ? fmt("%.4f", acc) : std::string()) + "\n";
  const auto dir = prepare_out(o.common.out);
  binary::write_text(dir / "eval.csv", csv);
  echo_config(sub, dir);
  out << "phoneme accuracy " << fmt("%.4f", acc) << " over " << entries.size()
      << " utterances (" << total_n << " reference tokens, " << total_e << " errors";
  if (missing) out << ", " << missing << " hypotheses missing";
  out << "); breakdown is one minimal alignment\n";
  return kExitOk;
}

struct FiltersOpts {
  CommonOpts common;
  std::string model;
  int n_fft = 512;
};

int cmd_filters(const FiltersOpts& o, const CLI::App& sub, std::ostream& out) {
  if (o.n_fft < 2) throw UsageError("--n-fft must be >= 2");
  const Model model = load_model(o.model);
  if (model.params.stages.empty()) throw DataError("model has no convolution stage");
  if (model.config.input_dim != 1) {
    throw DataError("filter spectra need raw-waveform input; first layer has input dimension " +
                    std::to_string(model.config.input_dim));
  }
  const auto spectra = filter_spectra(model.params.stages[0], o.n_fft);
  const auto dir = prepare_out(o.common.out);
  binary::write_text(dir / "filters.csv",
                     filter_spectra_csv(spectra, model.frontend.sample_rate, o.n_fft));
  echo_config(sub, dir);
  const auto peaks = spectral_peaks(spectra);
  for (std::size_t f = 0; f < peaks.size(); ++f) {
    out << "filter " << f << " peak "
        << fmt("%.1f", static_cast<double>(peaks[f]) * model.frontend.sample_rate / o.n_fft)
        << " Hz\n";
  }
  return kExitOk;
}

struct AblateOpts {
  CommonOpts common;
  NetOpts net;
  DataOpts data;
  TrainOpts train;
  std::string train_manifest, cv_manifest, test_manifest;
  int hmm_states = 3;
};

int cmd_ablate(const AblateOpts& o, const CLI::App& sub, std::ostream& out) {
  const auto tc = make_train_config(o.train, o.common.seed);
  if (parse_stages(o.net.stages).size() != 3) {
    throw UsageError("ablate-pool needs a 3-stage base config");
  }
  if (o.hmm_states < 1) throw UsageError("--hmm-states must be >= 1");
  const auto corpus = load_corpus(o.data, o.train_manifest, o.cv_manifest, o.test_manifest);
  const auto base = make_network(o.net, o.data, corpus);
  const auto garbage = corpus.alphabet.garbage();
  const auto w = base.input_window;
  const auto train_ds = make_dataset(corpus.train, corpus.frontend, w, garbage);
  const auto cv_ds = make_dataset(corpus.cv, corpus.frontend, w, garbage);
  const auto test_ds = make_dataset(corpus.test, corpus.frontend, w, garbage);
  const auto rows = ablate_pooling({&train_ds, &cv_ds, &test_ds, &corpus.test}, base, tc,
                                   o.hmm_states);
  const auto dir = prepare_out(o.common.out);
  binary::write_text(dir / "ablation.csv", ablation_csv(rows));
  echo_config(sub, dir);
  for (const auto& r : rows) {
    out << r.pools << " pooling layers: ";
    if (r.error) {
      out << "error: " << *r.error << "\n";
    } else {
      out << r.params << " parameters, test accuracy " << fmt("%.4f", r.test_accuracy)
          << "\n";
    }
  }
  return kExitOk;
}

struct CheckGradOpts {
  CommonOpts common;
  NetOpts net;
  int classes = 3;
  double epsilon = 1e-4;
  double tolerance = 1e-4;
  std::string corrupt;
};

int cmd_check_grad(const CheckGradOpts& o, const CLI::App& sub,
                   std::ostream& out) {
  Rng rng(mix_seed(o.common.seed, 3));
  NetworkConfig cfg;
  const bool explicit_net = sub.count("--stages") + sub.count("--window") +
                                sub.count("--hidden") + sub.count("--classes") >
                            0;
  if (explicit_net) {
    cfg.input_window = o.net.window;
    cfg.stages = parse_stages(o.net.stages);
    cfg.hidden_units = o.net.hidden;
    cfg.num_classes = o.classes;
    as_usage([&] { cfg.validate(); });
  } else {
    cfg = random_small_config(rng);
  }
  GradCheckOptions go;
  go.epsilon = o.epsilon;
  go.tolerance = o.tolerance;
  if (!o.corrupt.empty()) go.corrupt_tensor = o.corrupt;
  if (!(go.epsilon > 0.0) || !(go.tolerance > 0.0)) {
    throw UsageError("--epsilon and --tolerance must be positive");
  }
  const auto params = init_params<double>(cfg, mix_seed(o.common.seed, 0));
  std::vector<double> window(static_cast<std::size_t>(cfg.input_window) *
                             static_cast<std::size_t>(cfg.input_dim));
  for (auto& v : window) v = rng.normal();
  const int target = static_cast<int>(rng.index(static_cast<std::size_t>(cfg.num_classes)));
  GradCheckReport report;
  as_usage([&] { report = check_gradients(params, window, target, go); });

  const std::string csv = grad_check_csv(report);
  if (!o.common.out.empty()) {
    const auto dir = prepare_out(o.common.out);
    binary::write_text(dir / "gradcheck.csv", csv);
    echo_config(sub, dir);
  }
  out << "network: window " << cfg.input_window << ", stages "
      << (cfg.stages.empty() ? std::string("none") : format_stages(cfg.stages))
      << ", hidden " << cfg.hidden_units << ", classes " << cfg.num_classes << "\n"
      << csv << (report.passed() ? "PASS" : "FAIL") << "\n";
  return report.passed() ? kExitOk : kExitNumeric;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Raw-waveform convolutional phoneme recognizer", "rawcnn"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);

  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();  // lets --config follow the subcommand name
    return s;
  };

  SynthOpts synth;
  auto* s_synth = sub("synth", "Generate a synthetic tone corpus");
  add_common(s_synth, synth.common, true);
  s_synth->add_option("--train-count", synth.n_train, "Training utterances")->capture_default_str();
  s_synth->add_option("--cv-count", synth.n_cv, "Cross-validation utterances")->capture_default_str();
  s_synth->add_option("--test-count", synth.n_test, "Test utterances")->capture_default_str();
  s_synth->add_option("--classes", synth.classes, "Number of classes")->capture_default_str();
  s_synth->add_option("--freqs", synth.freqs, "Comma-separated class frequencies in Hz");
  s_synth->add_option("--amplitude", synth.amplitude, "Tone amplitude")->capture_default_str();
  s_synth->add_option("--noise", synth.noise, "Gaussian noise sigma")->capture_default_str();
  s_synth->add_option("--min-segment-ms", synth.min_seg_ms)->capture_default_str();
  s_synth->add_option("--max-segment-ms", synth.max_seg_ms)->capture_default_str();
  s_synth->add_option("--min-segments", synth.min_segs)->capture_default_str();
  s_synth->add_option("--max-segments", synth.max_segs)->capture_default_str();
  s_synth->add_option("--bigram-boost", synth.bigram_boost,
                      "Weight of k -> k+1 segment transitions (0: uniform)")
      ->capture_default_str();
  s_synth->add_option("--sample-rate", synth.sample_rate)->capture_default_str();

  TrainCmdOpts train;
  auto* s_train = sub("train", "Train a network and its CRF transitions");
  add_common(s_train, train.common, true);
  s_train->add_option("--train", train.train_manifest, "Training manifest")->required();
  s_train->add_option("--cv", train.cv_manifest, "Cross-validation manifest")->required();
  add_net(s_train, train.net);
  add_data(s_train, train.data);
  add_train(s_train, train.train);
  s_train->add_option("--crf-lr", train.crf_lr, "CRF transition learning rate")->capture_default_str();
  s_train->add_option("--crf-epochs", train.crf_epochs, "CRF transition epochs")->capture_default_str();

  GridCmdOpts grid;
  auto* s_grid = sub("grid", "Hyper-parameter grid search");
  add_common(s_grid, grid.common, true);
  s_grid->add_option("--train", grid.train_manifest, "Training manifest")->required();
  s_grid->add_option("--cv", grid.cv_manifest, "Cross-validation manifest")->required();
  add_net(s_grid, grid.net);
  add_data(s_grid, grid.data);
  add_train(s_grid, grid.train);
  s_grid->add_option("--windows-ms", grid.windows_ms, "Candidate windows in ms (default 100,250,400,550,700)");
  s_grid->add_option("--kernel-widths", grid.kernel_widths, "Candidate kernel widths per stage: 1,3;5;... (default 1,3,5,7,9 each)");
  s_grid->add_option("--filters", grid.filters, "Candidate filter counts (default 10,50,90)");
  s_grid->add_option("--hidden-units", grid.hidden, "Candidate hidden sizes (default 100,500,1000,1500)");
  s_grid->add_option("--pools", grid.pools, "Candidate pool widths (default 1,3)");
  s_grid->add_option("--max-configs", grid.max_configs, "Seeded random subsample size (0: all)")->capture_default_str();
  s_grid->add_flag("--parallel", grid.parallel, "Train candidates concurrently");

  DecodeOpts decode;
  auto* s_decode = sub("decode", "Decode utterances with a trained model");
  add_common(s_decode, decode.common, true);
  s_decode->add_option("--test", decode.test_manifest, "Manifest to decode")->required();
  s_decode->add_option("--model", decode.model, "Model file")->required();
  s_decode->add_option("--decoder", decode.decoder, "crf, hmm or argmax")->capture_default_str();
  s_decode->add_option("--hmm-states", decode.hmm_states, "Minimum duration of the HMM decoder")->capture_default_str();

  EvalOpts eval;
  auto* s_eval = sub("eval", "Score hypotheses against reference labels");
  add_common(s_eval, eval.common, true);
  s_eval->add_option("--ref", eval.ref_manifest, "Reference manifest")->required();
  s_eval->add_option("--hyp", eval.hyp_dir, "Directory of <id>.txt hypotheses")->required();
  s_eval->add_option("--map", eval.map, "Mapping applied to reference labels");
  s_eval->add_option("--strip", eval.strip, "Label removed from both sides before scoring");

  FiltersOpts filters;
  auto* s_filters = sub("filters", "Export first-layer filter magnitude spectra");
  add_common(s_filters, filters.common, true);
  s_filters->add_option("--model", filters.model, "Model file")->required();
  s_filters->add_option("--n-fft", filters.n_fft, "DFT size")->capture_default_str();

  AblateOpts ablate;
  auto* s_ablate = sub("ablate-pool", "Train 0-3 pooling-layer variants of a 3-stage config");
  add_common(s_ablate, ablate.common, true);
  s_ablate->add_option("--train", ablate.train_manifest, "Training manifest")->required();
  s_ablate->add_option("--cv", ablate.cv_manifest, "Cross-validation manifest")->required();
  s_ablate->add_option("--test", ablate.test_manifest, "Test manifest")->required();
  add_net(s_ablate, ablate.net);
  add_data(s_ablate, ablate.data);
  add_train(s_ablate, ablate.train);
  s_ablate->add_option("--hmm-states", ablate.hmm_states)->capture_default_str();

  CheckGradOpts check;
  auto* s_check = sub("check-grad", "Compare analytic gradients with finite differences");
  add_common(s_check, check.common, false);
  add_net(s_check, check.net);
  s_check->add_option("--classes", check.classes, "Number of classes")->capture_default_str();
  s_check->add_option("--epsilon", check.epsilon)->capture_default_str();
  s_check->add_option("--tolerance", check.tolerance)->capture_default_str();
  s_check->add_option("--corrupt", check.corrupt,
                      "Perturb the analytic gradient of this tensor (self-test)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (s_synth->parsed()) return cmd_synth(synth, *s_synth, out);
    if (s_train->parsed()) return cmd_train(train, *s_train, out);
    if (s_grid->parsed()) return cmd_grid(grid, *s_grid, out);
    if (s_decode->parsed()) return cmd_decode(decode, *s_decode, out, err);
    if (s_eval->parsed()) return cmd_eval(eval, *s_eval, out);
    if (s_filters->parsed()) return cmd_filters(filters, *s_filters, out);
    if (s_ablate->parsed()) return cmd_ablate(ablate, *s_ablate, out);
    if (s_check->parsed()) return cmd_check_grad(check, *s_check, out);
  } catch (const UsageError& e) {
    err << "rawcnn " << name << ": usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "rawcnn " << name << ": numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "rawcnn " << name << ": error: " << e.what() << "\n";
    return kExitData;
  }
  err << "rawcnn: no subcommand\n";
  return kExitUsage;
}

}  // namespace rawcnn::cli
