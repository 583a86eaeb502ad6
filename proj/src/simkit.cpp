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

#include "sspf/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "sspf/circstats.hpp"
#include "sspf/errors.hpp"

namespace sspf {

namespace {

constexpr std::size_t kMaxOracleStates = 100000;

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1]");
  }
}

void check_concentration(double c, const char* name) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw ValidationError(std::string(name) + " must be finite and nonnegative");
  }
}

std::vector<double> random_unit_vector(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double n = 0.0;
  while (n < 1e-12) {
    n = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      n += x * x;
    }
  }
  n = std::sqrt(n);
  for (auto& x : v) {
    x /= n;
  }
  return v;
}

// Fresh channel state after a change: -1 for silence, else a speaker.
int draw_state(Rng& rng, const SimConfig& cfg) {
  if (rng.uniform() < cfg.silence_probability) {
    return -1;
  }
  return std::min(cfg.num_speakers - 1, static_cast<int>(rng.uniform() * cfg.num_speakers));
}

std::size_t ipow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > kMaxOracleStates) {
      return kMaxOracleStates + 1;
    }
    out *= base;
  }
  return out;
}

// v[.., j, ..] = sum_i v[.., i, ..] K[i][j] along one axis (forward),
// or v[.., i, ..] = sum_j K[i][j] v[.., j, ..] (backward).
void apply_axis(std::vector<double>& v, std::size_t stride, std::size_t dim, const std::vector<double>& kernel,
                bool backward) {
  const std::size_t block = stride * dim;
  std::vector<double> in(dim);
  std::vector<double> out(dim);
  for (std::size_t outer = 0; outer < v.size(); outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      const std::size_t base = outer + inner;
      for (std::size_t i = 0; i < dim; ++i) {
        in[i] = v[base + i * stride];
      }
      for (std::size_t j = 0; j < dim; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          acc += backward ? kernel[j * dim + i] * in[i] : in[i] * kernel[i * dim + j];
        }
        out[j] = acc;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        v[base + j * stride] = out[j];
      }
    }
  }
}

void normalize(std::vector<double>& v, std::size_t frame) {
  double total = 0.0;
  for (const double x : v) {
    total += x;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ModelError("oracle lost all probability mass", frame);
  }
  for (auto& x : v) {
    x /= total;
  }
}

}  // namespace

void validate_sim_config(const SimConfig& c) {
  if (c.num_speakers < 1) {
    throw ValidationError("speaker count must be at least 1");
  }
  if (c.num_channels < 1) {
    throw ValidationError("channel count must be at least 1");
  }
  if (c.num_frames < 1) {
    throw ValidationError("frame count must be at least 1");
  }
  if (c.embedding_dim < 2) {
    throw ValidationError("embedding dimension must be at least 2");
  }
  if (c.num_bins < 1) {
    throw ValidationError("bin count must be positive");
  }
  if (!(c.frame_seconds > 0.0)) {
    throw ValidationError("frame duration must be positive");
  }
  check_probability(c.turn_persistence, "turn persistence");
  check_probability(c.silence_probability, "silence probability");
  check_concentration(c.sigma_move, "sigma_move");
  check_concentration(c.kappa, "kappa");
  check_concentration(c.gamma, "gamma");
  check_concentration(c.noise_concentration(), "DOA noise");
  if (c.word_min_frames < 1 || c.word_max_frames < c.word_min_frames) {
    throw ValidationError("word length range must satisfy 1 <= min <= max");
  }
  if (c.forced_silence && (c.forced_silence->speaker < 0 || c.forced_silence->speaker >= c.num_speakers)) {
    throw ValidationError("forced-silence speaker out of range");
  }
}

std::vector<double> vmf_sample(Rng& rng, std::span<const double> mean_direction, double concentration) {
  check_concentration(concentration, "vMF concentration");
  const std::size_t dim = mean_direction.size();
  if (dim < 2) {
    throw ValidationError("vMF sampling needs dimension >= 2");
  }
  const double p1 = static_cast<double>(dim) - 1.0;
  const double b = p1 / (2.0 * concentration + std::sqrt(4.0 * concentration * concentration + p1 * p1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = concentration * x0 + p1 * std::log(1.0 - x0 * x0);
  std::gamma_distribution<double> gamma(0.5 * p1, 1.0);
  double w = 0.0;
  while (true) {
    const double g1 = gamma(rng);
    const double g2 = gamma(rng);
    const double z = g1 / (g1 + g2);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform_open();
    if (concentration * w + p1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
      break;
    }
  }
  // tangent direction orthogonal to the mean
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double vn = 0.0;
  while (vn < 1e-12) {
    double proj = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      v[d] = normal(rng);
      proj += v[d] * mean_direction[d];
    }
    vn = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      v[d] -= proj * mean_direction[d];
      vn += v[d] * v[d];
    }
    vn = std::sqrt(vn);
  }
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  std::vector<double> out(dim);
  double on = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    out[d] = w * mean_direction[d] + s * v[d] / vn;
    on += out[d] * out[d];
  }
  on = std::sqrt(on);
  for (auto& x : out) {
    x /= on;
  }
  return out;
}

SimulatedMeeting simulate_meeting(const SimConfig& cfg) {
  validate_sim_config(cfg);
  Rng rng = purpose_stream(cfg.seed, 0, 0, StreamPurpose::kSimulation);
  const auto m_count = static_cast<std::size_t>(cfg.num_speakers);
  const auto n_count = static_cast<std::size_t>(cfg.num_channels);
  const std::size_t t_count = cfg.num_frames;

  SimulatedMeeting out;
  auto& p = out.params;
  p.num_speakers = cfg.num_speakers;
  p.num_channels = cfg.num_channels;
  p.gamma = cfg.gamma;
  p.sigma_move = cfg.sigma_move;
  p.kappa = cfg.kappa;
  p.bins = BinGeometry(cfg.num_bins);
  for (std::size_t m = 0; m < m_count; ++m) {
    p.centroids.push_back(random_unit_vector(rng, cfg.embedding_dim));
  }
  // speaker-to-speaker part of the channel chain
  const double change = (1.0 - cfg.turn_persistence) * (1.0 - cfg.silence_probability) / static_cast<double>(m_count);
  p.transitions.assign(m_count, std::vector<double>(m_count, change));
  for (std::size_t i = 0; i < m_count; ++i) {
    p.transitions[i][i] += cfg.turn_persistence;
    double total = 0.0;
    for (const double a : p.transitions[i]) {
      total += a;
    }
    for (auto& a : p.transitions[i]) {
      a = total > 0.0 ? a / total : 1.0 / static_cast<double>(m_count);
    }
  }

  auto& truth = out.truth;
  truth.num_speakers = cfg.num_speakers;
  truth.num_channels = cfg.num_channels;
  truth.locations.resize(t_count * m_count);
  truth.active.resize(t_count * n_count);

  std::vector<int> state(n_count, -1);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t m = 0; m < m_count; ++m) {
      truth.locations[t * m_count + m] = t == 0 ? wrap_angle(kPi * (2.0 * rng.uniform() - 1.0))
                                                : vm_sample(rng, truth.locations[(t - 1) * m_count + m], cfg.sigma_move);
    }
    for (std::size_t n = 0; n < n_count; ++n) {
      if (t == 0 || rng.uniform() >= cfg.turn_persistence) {
        state[n] = draw_state(rng, cfg);
      }
      if (cfg.forced_silence && state[n] == cfg.forced_silence->speaker && t >= cfg.forced_silence->start &&
          t < cfg.forced_silence->start + cfg.forced_silence->length) {
        state[n] = -1;
      }
      for (std::size_t k = 0; k < n; ++k) {
        if (state[n] >= 0 && state[k] == state[n]) {
          state[n] = -1;
        }
      }
      truth.active[t * n_count + n] = state[n];
    }

    ObservationFrame frame;
    frame.t = t;
    for (std::size_t n = 0; n < n_count; ++n) {
      const int q = state[n];
      if (q < 0) {
        continue;
      }
      ChannelObservation c;
      c.channel = static_cast<int>(n);
      c.dvec = vmf_sample(rng, p.centroids[static_cast<std::size_t>(q)], cfg.gamma);
      const double noisy = vm_sample(rng, truth.locations[t * m_count + static_cast<std::size_t>(q)],
                                     cfg.noise_concentration());
      c.ssl = discretized_vm(noisy, cfg.kappa, p.bins);
      c.doa = ssl_mode_doa(*c.ssl, p.bins);
      frame.channels.push_back(std::move(c));
    }
    out.observations.push_back(std::move(frame));
  }

  // split each channel's same-speaker runs into words
  struct Pending {
    WordSegment word;
    int speaker;
  };
  std::vector<Pending> pending;
  const auto word_span = cfg.word_max_frames - cfg.word_min_frames + 1;
  for (std::size_t n = 0; n < n_count; ++n) {
    std::size_t t = 0;
    while (t < t_count) {
      const int q = truth.active[t * n_count + n];
      if (q < 0) {
        ++t;
        continue;
      }
      std::size_t run_end = t;
      while (run_end + 1 < t_count && truth.active[(run_end + 1) * n_count + n] == q) {
        ++run_end;
      }
      std::size_t start = t;
      while (start <= run_end) {
        const std::size_t len =
            cfg.word_min_frames +
            std::min(word_span - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(word_span)));
        const std::size_t end = std::min(run_end, start + len - 1);
        pending.push_back({{0, static_cast<int>(n), start, end}, q});
        start = end + 1;
      }
      t = run_end + 1;
    }
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return a.word.start != b.word.start ? a.word.start < b.word.start : a.word.channel < b.word.channel;
  });
  for (std::size_t l = 0; l < pending.size(); ++l) {
    pending[l].word.id = static_cast<int>(l);
    out.words.push_back(pending[l].word);
    truth.word_speakers.push_back(pending[l].speaker);
  }
  return out;
}

OraclePosteriors grid_hmm_posterior(std::span<const ObservationFrame> observations,
                                    std::span<const WordSegment> words, const ModelParams& params,
                                    const EmissionConfig& emission, int grid_bins, bool restrict_to_boundaries) {
  if (const auto issues = validate_params(params); !issues.empty()) {
    throw ValidationError("invalid model parameters: " + issues.front());
  }
  if (grid_bins < 1) {
    throw ValidationError("grid must have at least one bin");
  }
  const int m_count = params.num_speakers;
  const int n_count = params.num_channels;
  const auto g = static_cast<std::size_t>(grid_bins);
  const auto mu = static_cast<std::size_t>(m_count);
  const std::size_t label_states = ipow(mu, n_count);
  const std::size_t bin_states = ipow(g, m_count);
  if (label_states > kMaxOracleStates || bin_states > kMaxOracleStates ||
      label_states * bin_states > kMaxOracleStates) {
    throw ValidationError("oracle state space exceeds 1e5 states");
  }
  const std::size_t states = label_states * bin_states;
  const std::size_t t_count = observations.size();
  validate_words(words, t_count, n_count);
  const auto boundaries = word_boundary_mask(words, t_count);

  const BinGeometry grid(grid_bins);
  std::vector<double> loc_kernel(g * g);
  for (std::size_t i = 0; i < g; ++i) {
    const auto row = discretized_vm(grid.center(static_cast<int>(i)), params.sigma_move, grid);
    std::copy(row.begin(), row.end(), loc_kernel.begin() + static_cast<std::ptrdiff_t>(i * g));
  }
  std::vector<double> label_kernel(mu * mu);
  std::vector<double> identity(mu * mu, 0.0);
  for (std::size_t i = 0; i < mu; ++i) {
    identity[i * mu + i] = 1.0;
    for (std::size_t j = 0; j < mu; ++j) {
      label_kernel[i * mu + j] = params.transitions[i][j];
    }
  }

  // state -> (labels, angles) decoding, shared by every frame
  std::vector<int> state_labels(states * static_cast<std::size_t>(n_count));
  std::vector<double> state_angles(states * mu);
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t bins_idx = s % bin_states;
    std::size_t label_idx = s / bin_states;
    for (int m = m_count - 1; m >= 0; --m) {
      state_angles[s * mu + static_cast<std::size_t>(m)] = grid.center(static_cast<int>(bins_idx % g));
      bins_idx /= g;
    }
    for (int n = n_count - 1; n >= 0; --n) {
      state_labels[s * static_cast<std::size_t>(n_count) + static_cast<std::size_t>(n)] =
          static_cast<int>(label_idx % mu);
      label_idx /= mu;
    }
  }

  std::vector<std::vector<double>> emis(t_count, std::vector<double>(states));
  for (std::size_t t = 0; t < t_count; ++t) {
    const FrameEvidence evidence(observations[t], params, emission);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < states; ++s) {
      const ParticleView view{
          std::span<const int>(state_labels).subspan(s * static_cast<std::size_t>(n_count),
                                                     static_cast<std::size_t>(n_count)),
          std::span<const double>(state_angles).subspan(s * mu, mu)};
      emis[t][s] = evidence.log_emission(view);
      peak = std::max(peak, emis[t][s]);
    }
    for (auto& e : emis[t]) {
      e = std::exp(e - peak);
    }
  }

  const auto transition = [&](std::vector<double>& v, std::size_t into_frame, bool backward) {
    const bool allow_switch = !restrict_to_boundaries || boundaries[into_frame];
    const auto& lk = allow_switch ? label_kernel : identity;
    for (int n = 0; n < n_count; ++n) {
      const std::size_t stride = ipow(mu, n_count - 1 - n) * bin_states;
      apply_axis(v, stride, mu, lk, backward);
    }
    for (int m = 0; m < m_count; ++m) {
      apply_axis(v, ipow(g, m_count - 1 - m), g, loc_kernel, backward);
    }
  };

  std::vector<std::vector<double>> alpha(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    if (t == 0) {
      alpha[t].assign(states, 1.0 / static_cast<double>(states));
    } else {
      alpha[t] = alpha[t - 1];
      transition(alpha[t], t, false);
    }
    for (std::size_t s = 0; s < states; ++s) {
      alpha[t][s] *= emis[t][s];
    }
    normalize(alpha[t], t);
  }

  const auto marginals = [&](const std::vector<double>& dist, std::size_t t, PosteriorTable& table) {
    for (int n = 0; n < n_count; ++n) {
      auto out = table.at(t, n);
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t s = 0; s < states; ++s) {
        out[static_cast<std::size_t>(state_labels[s * static_cast<std::size_t>(n_count) +
                                                  static_cast<std::size_t>(n)])] += dist[s];
      }
    }
  };

  OraclePosteriors result{PosteriorTable(t_count, n_count, m_count), PosteriorTable(t_count, n_count, m_count)};
  std::vector<double> beta(states, 1.0);
  for (std::size_t t = t_count; t-- > 0;) {
    if (t + 1 < t_count) {
      for (std::size_t s = 0; s < states; ++s) {
        beta[s] *= emis[t + 1][s];
      }
      transition(beta, t + 1, true);
      normalize(beta, t);
    }
    std::vector<double> post(states);
    for (std::size_t s = 0; s < states; ++s) {
      post[s] = alpha[t][s] * beta[s];
    }
    normalize(post, t);
    marginals(alpha[t], t, result.filtered);
    marginals(post, t, result.smoothed);
  }
  return result;
}

std::size_t default_movement_min_frames(std::size_t num_frames) {
  // 30 s of 0.4 s frames in a one-hour (9000-frame) meeting
  const double scaled = 75.0 * static_cast<double>(num_frames) / 9000.0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(scaled)));
}

bool speaker_moves(const GroundTruth& truth, int speaker, std::size_t min_frames, double min_arc) {
  constexpr std::size_t kBins = 360;
  std::vector<std::size_t> hist(kBins, 0);
  const std::size_t t_count = truth.active.size() / static_cast<std::size_t>(truth.num_channels);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (int n = 0; n < truth.num_channels; ++n) {
      if (truth.speaker(t, n) != speaker) {
        continue;
      }
      const double a = truth.location(t, speaker);
      auto b = static_cast<std::size_t>((a + kPi) / kTwoPi * static_cast<double>(kBins));
      hist[std::min(b, kBins - 1)] += 1;
    }
  }
  // circular prefix sums over two laps
  std::vector<std::size_t> prefix(2 * kBins + 1, 0);
  for (std::size_t i = 0; i < 2 * kBins; ++i) {
    prefix[i + 1] = prefix[i] + hist[i % kBins];
  }
  const auto count = [&](std::size_t from, std::size_t len) { return prefix[from + len] - prefix[from]; };
  // arcs are rounded up to whole bins so they are never shorter than min_arc
  const auto gap = static_cast<std::size_t>(std::ceil(min_arc / kTwoPi * static_cast<double>(kBins)));
  if (2 * gap >= kBins) {
    return false;
  }
  for (std::size_t a = 0; a < kBins; ++a) {
    // first gap [a, a + gap), region one [a + gap, b), second gap [b, b + gap), region two up to a + kBins
    for (std::size_t b = a + gap + 1; b + gap < a + kBins; ++b) {
      const std::size_t r1 = count((a + gap) % kBins, b - a - gap);
      const std::size_t r2 = count((b + gap) % kBins, a + kBins - b - gap);
      if (r1 >= min_frames && r2 >= min_frames) {
        return true;
      }
    }
  }
  return false;
}

bool meeting_has_movement(const GroundTruth& truth, std::size_t min_frames) {
  for (int m = 0; m < truth.num_speakers; ++m) {
    if (speaker_moves(truth, m, min_frames, kPi / 6.0)) {
      return true;
    }
  }
  return false;
}

}  // namespace sspf
