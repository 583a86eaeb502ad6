// Copyright 2026 The SSPF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sspf/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sspf/decode.hpp"
#include "sspf/errors.hpp"
#include "sspf/filter.hpp"
#include "sspf/io.hpp"
#include "sspf/pipeline.hpp"
#include "sspf/simkit.hpp"
#include "sspf/smoother.hpp"

namespace sspf::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  // shared inputs
  std::string observations;
  std::string words;
  std::string params;
  std::string store;
  std::string posteriors;
  std::string out;
  std::string feature{"ssl"};
  std::string aggregate{"sum"};
  std::uint64_t seed{0};
  bool restrict_boundaries{false};

  // filter / smooth / oracle
  std::size_t particles{20000};
  double ess{0.5};
  std::size_t k_backward{5000};
  std::string trace;
  int grid_bins{36};
  std::string filtered_out;
  std::string smoothed_out;

  // init
  InitConfig init;
  int channels{0};
  std::string clusters_out;

  // eval
  std::string hyp;
  std::string ref;

  // simulate
  SimConfig sim;
  double doa_noise{-1.0};
  int silent_speaker{-1};
  std::size_t silent_start{0};
  std::size_t silent_length{0};
};

ModelParams load_params(const Options& o) {
  auto params = io::read_params(o.params);
  if (const auto issues = validate_params(params); !issues.empty()) {
    std::string msg = "invalid model parameters in " + o.params + ":";
    for (const auto& i : issues) {
      msg += "\n  " + i;
    }
    throw ValidationError(msg);
  }
  return params;
}

std::vector<ObservationFrame> load_observations(const Options& o, const ModelParams& params) {
  auto frames = io::read_observations(o.observations);
  for (auto& f : frames) {
    validate_frame(f, params);
  }
  return frames;
}

std::vector<WordSegment> load_words_if_any(const Options& o, std::size_t num_frames, int num_channels) {
  if (o.words.empty()) {
    if (o.restrict_boundaries) {
      throw ValidationError("--restrict-boundaries requires --words");
    }
    return {};
  }
  auto words = io::read_words(o.words);
  validate_words(words, num_frames, num_channels);
  return words;
}

void cmd_simulate(Options& o, std::ostream& out) {
  auto cfg = o.sim;
  if (o.doa_noise >= 0.0) {
    cfg.doa_noise = o.doa_noise;
  }
  if (o.silent_speaker >= 0) {
    cfg.forced_silence = ForcedSilence{o.silent_speaker, o.silent_start, o.silent_length};
  }
  const auto meeting = simulate_meeting(cfg);
  const fs::path dir(o.out);
  io::write_observations(dir / "observations.jsonl", meeting.observations);
  io::write_words(dir / "words.jsonl", meeting.words);
  io::write_labels(dir / "labels.jsonl", meeting.words, meeting.truth.word_speakers);
  io::write_params(dir / "params.json", meeting.params);
  io::write_activity(dir / "activity.jsonl", meeting.truth);
  std::vector<TraceEntry> truth_trace;
  for (std::size_t t = 0; t < cfg.num_frames; ++t) {
    for (int m = 0; m < cfg.num_speakers; ++m) {
      truth_trace.push_back({t, m, meeting.truth.location(t, m), 1.0});
    }
  }
  io::write_trace(dir / "locations.jsonl", truth_trace);
  out << "simulated " << cfg.num_frames << " frames, " << meeting.words.size() << " words into " << dir.string()
      << '\n';
}

void cmd_init(Options& o, std::ostream& out) {
  const auto words = io::read_words(o.words);
  auto frames = io::read_observations(o.observations);
  int channels = o.channels;
  if (channels <= 0) {
    for (const auto& w : words) {
      channels = std::max(channels, w.channel + 1);
    }
    for (const auto& f : frames) {
      for (const auto& c : f.channels) {
        channels = std::max(channels, c.channel + 1);
      }
    }
  }
  const auto result = initialize_params(frames, words, channels, o.init);
  io::write_params(o.out, result.params);
  if (!o.clusters_out.empty()) {
    io::write_labels(o.clusters_out, words, result.clustering.labels);
  }
  out << "initialized " << result.params.num_speakers << " speakers from " << words.size() << " words\n";
}

void cmd_filter(Options& o, std::ostream& out) {
  const auto params = load_params(o);
  const auto frames = load_observations(o, params);
  const auto words = load_words_if_any(o, frames.size(), params.num_channels);
  FilterConfig fc;
  fc.num_particles = o.particles;
  fc.ess_threshold_fraction = o.ess;
  fc.restrict_switch_to_word_boundaries = o.restrict_boundaries;
  fc.seed = o.seed;
  const auto emission = EmissionConfig::from_params(params, parse_location_feature(o.feature));

  PosteriorTable table(frames.size(), params.num_channels, params.num_speakers);
  std::vector<TraceEntry> trace;
  std::unique_ptr<io::EnsembleStoreWriter> writer;
  if (!o.store.empty()) {
    writer = std::make_unique<io::EnsembleStoreWriter>(o.store, fc.num_particles, params.num_speakers,
                                                       params.num_channels);
  }
  run_forward(frames, words, params, emission, fc, [&](const ParticleEnsemble& e) {
    record_posteriors(e, table);
    if (!o.trace.empty()) {
      const auto summary = location_summary(e);
      for (std::size_t m = 0; m < summary.size(); ++m) {
        trace.push_back({e.t, static_cast<int>(m), summary[m].mean, summary[m].resultant});
      }
    }
    if (writer) {
      writer->write(e);
    }
  });
  if (writer) {
    writer->close();
  }
  io::write_posteriors(o.posteriors, table);
  if (!o.trace.empty()) {
    io::write_trace(o.trace, trace);
  }
  out << "filtered " << frames.size() << " frames with " << fc.num_particles << " particles\n";
}

void cmd_smooth(Options& o, std::ostream& out) {
  const auto params = load_params(o);
  const auto ensembles = io::read_ensemble_store(o.store);
  if (!ensembles.empty() &&
      (ensembles.front().num_speakers != params.num_speakers || ensembles.front().num_channels != params.num_channels)) {
    throw ValidationError("ensemble store shape does not match the model parameters");
  }
  const auto words = load_words_if_any(o, ensembles.size(), params.num_channels);
  FilterConfig fc;
  fc.restrict_switch_to_word_boundaries = o.restrict_boundaries;
  fc.seed = o.seed;
  const auto smoothed = backward_pass(ensembles, words, params, fc, o.k_backward);
  io::write_posteriors(o.posteriors, smoothed_posteriors(ensembles, smoothed));
  out << "smoothed " << ensembles.size() << " frames with "
      << (ensembles.empty() ? 0 : std::min(o.k_backward, ensembles.front().size())) << " backward particles\n";
}

void cmd_decode(Options& o, std::ostream& out) {
  const auto table = io::read_posteriors(o.posteriors);
  const auto words = io::read_words(o.words);
  validate_words(words, table.frames(), table.channels());
  const auto labels = decode_words(table, words, parse_aggregation(o.aggregate));
  io::write_labels(o.out, words, labels);
  out << "decoded " << words.size() << " words (" << o.aggregate << ")\n";
}

void cmd_trace(Options& o, std::ostream& out) {
  const auto ensembles = io::read_ensemble_store(o.store);
  io::write_trace(o.out, location_trace(ensembles));
  out << "traced " << ensembles.size() << " frames\n";
}

void cmd_eval(Options& o, std::ostream& out) {
  const auto words = io::read_words(o.words);
  const auto hyp = io::read_labels(o.hyp, words);
  const auto ref = io::read_labels(o.ref, words);
  const auto metrics = diarisation_metrics(hyp, ref, words);
  std::ostringstream report;
  report << std::setprecision(17);
  report << "words " << metrics.num_words << '\n';
  report << "frames " << metrics.num_frames << '\n';
  report << "word_speaker_error_rate " << metrics.word_error_rate << '\n';
  report << "frame_speaker_error_rate " << metrics.frame_error_rate << '\n';
  report << "mapping";
  for (std::size_t h = 0; h < metrics.mapping.size(); ++h) {
    report << ' ' << h << "->";
    if (metrics.mapping[h]) {
      report << *metrics.mapping[h];
    } else {
      report << '-';
    }
  }
  report << "\nconfusion (rows: hypothesis, columns: reference)\n";
  for (const auto& row : metrics.confusion) {
    for (std::size_t r = 0; r < row.size(); ++r) {
      report << (r == 0 ? "" : " ") << row[r];
    }
    report << '\n';
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::trunc);
    if (!f) {
      throw ValidationError("cannot open " + o.out + " for writing");
    }
    f << report.str();
  }
  out << report.str();
}

void cmd_oracle(Options& o, std::ostream& out) {
  const auto params = load_params(o);
  const auto frames = load_observations(o, params);
  const auto words = load_words_if_any(o, frames.size(), params.num_channels);
  const auto emission = EmissionConfig::from_params(params, parse_location_feature(o.feature));
  const auto result = grid_hmm_posterior(frames, words, params, emission, o.grid_bins, o.restrict_boundaries);
  io::write_posteriors(o.filtered_out, result.filtered);
  if (!o.smoothed_out.empty()) {
    io::write_posteriors(o.smoothed_out, result.smoothed);
  }
  out << "oracle posteriors for " << frames.size() << " frames on a " << o.grid_bins << "-bin grid\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Joint speaker diarisation and location tracking with a switching state-space particle filter",
               "sspf"};
  app.set_config("--config", "", "TOML/INI file with option values, one [section] per subcommand (flags override it)");
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  const auto add_feature = [&](CLI::App* cmd) {
    cmd->add_option("--feature", o.feature, "Location feature: none, doa or ssl")
        ->check(CLI::IsMember({"none", "doa", "ssl"}))
        ->capture_default_str();
  };

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic meeting dataset");
  simulate->add_option("--out", o.out, "Output directory")->required();
  simulate->add_option("--speakers", o.sim.num_speakers)->capture_default_str();
  simulate->add_option("--channels", o.sim.num_channels)->capture_default_str();
  simulate->add_option("--frames", o.sim.num_frames)->capture_default_str();
  simulate->add_option("--frame-seconds", o.sim.frame_seconds)->capture_default_str();
  simulate->add_option("--sigma-move", o.sim.sigma_move, "Location random-walk concentration")->capture_default_str();
  simulate->add_option("--kappa", o.sim.kappa, "SSL concentration")->capture_default_str();
  simulate->add_option("--doa-noise", o.doa_noise, "Angular noise concentration (default: kappa)");
  simulate->add_option("--gamma", o.sim.gamma, "d-vector concentration")->capture_default_str();
  simulate->add_option("--dim", o.sim.embedding_dim, "d-vector dimension")->capture_default_str();
  simulate->add_option("--bins", o.sim.num_bins, "SSL bins")->capture_default_str();
  simulate->add_option("--persistence", o.sim.turn_persistence)->capture_default_str();
  simulate->add_option("--silence", o.sim.silence_probability)->capture_default_str();
  simulate->add_option("--word-min", o.sim.word_min_frames)->capture_default_str();
  simulate->add_option("--word-max", o.sim.word_max_frames)->capture_default_str();
  simulate->add_option("--seed", o.sim.seed)->capture_default_str();
  simulate->add_option("--silent-speaker", o.silent_speaker, "Speaker forced silent over a span");
  simulate->add_option("--silent-start", o.silent_start);
  simulate->add_option("--silent-length", o.silent_length);

  auto* init = app.add_subcommand("init", "Initialize model parameters by agglomerative clustering of words");
  init->add_option("--observations", o.observations)->required();
  init->add_option("--words", o.words)->required();
  init->add_option("--out", o.out, "Parameter file to write")->required();
  init->add_option("--clusters", o.clusters_out, "Also write the clustering as word labels");
  init->add_option("--channels", o.channels, "Channel count (default: inferred)");
  init->add_option("--threshold", o.init.ahc_threshold, "Stop merging below this cosine similarity")
      ->capture_default_str();
  init->add_option("--alpha", o.init.alpha, "Uniform smoothing weight")->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  init->add_option("--gamma", o.init.gamma)->capture_default_str();
  init->add_option("--sigma-move", o.init.sigma_move)->capture_default_str();
  init->add_option("--kappa", o.init.kappa)->capture_default_str();
  init->add_option("--bins", o.init.num_bins)->capture_default_str();

  auto* filter = app.add_subcommand("filter", "Run the forward particle filter");
  filter->add_option("--observations", o.observations)->required();
  filter->add_option("--params", o.params)->required();
  filter->add_option("--words", o.words, "Needed for --restrict-boundaries");
  filter->add_option("--posteriors", o.posteriors, "Filtered posteriors to write")->required();
  filter->add_option("--store", o.store, "Binary ensemble store to write (needed by smooth and trace)");
  filter->add_option("--trace", o.trace, "Location trace to write");
  filter->add_option("--particles", o.particles)->check(CLI::PositiveNumber)->capture_default_str();
  filter->add_option("--ess", o.ess, "Resample when ESS falls below this fraction of R")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  filter->add_option("--seed", o.seed)->capture_default_str();
  filter->add_flag("--restrict-boundaries", o.restrict_boundaries, "Allow speaker changes only where words start");
  add_feature(filter);

  auto* smooth = app.add_subcommand("smooth", "Backward smoothing over a stored forward pass");
  smooth->add_option("--store", o.store)->required();
  smooth->add_option("--params", o.params)->required();
  smooth->add_option("--words", o.words, "Needed for --restrict-boundaries");
  smooth->add_option("--posteriors", o.posteriors, "Smoothed posteriors to write")->required();
  smooth->add_option("--k-backward", o.k_backward, "Particles sub-sampled per frame")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  smooth->add_option("--seed", o.seed)->capture_default_str();
  smooth->add_flag("--restrict-boundaries", o.restrict_boundaries, "Allow speaker changes only where words start");

  auto* decode = app.add_subcommand("decode", "Assign a speaker to every word");
  decode->add_option("--posteriors", o.posteriors)->required();
  decode->add_option("--words", o.words)->required();
  decode->add_option("--out", o.out, "Word labels to write")->required();
  decode->add_option("--aggregate", o.aggregate, "sum, product or majority")
      ->check(CLI::IsMember({"sum", "product", "majority"}))
      ->capture_default_str();

  auto* trace = app.add_subcommand("trace", "Per-speaker location trace from a stored forward pass");
  trace->add_option("--store", o.store)->required();
  trace->add_option("--out", o.out)->required();

  auto* eval = app.add_subcommand("eval", "Score word labels against a reference");
  eval->add_option("--hyp", o.hyp)->required();
  eval->add_option("--ref", o.ref)->required();
  eval->add_option("--words", o.words)->required();
  eval->add_option("--out", o.out, "Also write the report here");

  auto* oracle = app.add_subcommand("oracle", "Exact posteriors on a discretized location grid (small instances)");
  oracle->add_option("--observations", o.observations)->required();
  oracle->add_option("--params", o.params)->required();
  oracle->add_option("--words", o.words);
  oracle->add_option("--filtered", o.filtered_out)->required();
  oracle->add_option("--smoothed", o.smoothed_out);
  oracle->add_option("--grid-bins", o.grid_bins)->check(CLI::PositiveNumber)->capture_default_str();
  oracle->add_flag("--restrict-boundaries", o.restrict_boundaries);
  add_feature(oracle);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitValidation;
  }

  try {
    if (simulate->parsed()) {
      cmd_simulate(o, out);
    } else if (init->parsed()) {
      cmd_init(o, out);
    } else if (filter->parsed()) {
      cmd_filter(o, out);
    } else if (smooth->parsed()) {
      cmd_smooth(o, out);
    } else if (decode->parsed()) {
      cmd_decode(o, out);
    } else if (trace->parsed()) {
      cmd_trace(o, out);
    } else if (eval->parsed()) {
      cmd_eval(o, out);
    } else if (oracle->parsed()) {
      cmd_oracle(o, out);
    }
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace sspf::cli
