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

#include "sspf/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sspf/circstats.hpp"
#include "sspf/errors.hpp"
#include "sspf/parallel.hpp"

namespace sspf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Cumulative rows of the speaker transition matrix.
class LabelSampler {
 public:
  explicit LabelSampler(const ModelParams& params) : m_{static_cast<std::size_t>(params.num_speakers)} {
    cumulative_.resize(m_ * m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m_; ++j) {
        acc += params.transitions[i][j];
        cumulative_[i * m_ + j] = acc;
      }
    }
  }

  int next(Rng& rng, int from) const {
    const double* row = cumulative_.data() + static_cast<std::size_t>(from) * m_;
    const double u = rng.uniform() * row[m_ - 1];
    for (std::size_t j = 0; j + 1 < m_; ++j) {
      if (u < row[j]) {
        return static_cast<int>(j);
      }
    }
    return static_cast<int>(m_ - 1);
  }

 private:
  std::size_t m_;
  std::vector<double> cumulative_;
};

void initial_into(Rng& rng, int num_speakers, std::span<int> labels, std::span<double> angles) {
  for (auto& q : labels) {
    q = std::min(num_speakers - 1, static_cast<int>(rng.uniform() * num_speakers));
  }
  for (auto& a : angles) {
    a = wrap_angle(kPi * (2.0 * rng.uniform() - 1.0));
  }
}

void transition_into(Rng& rng, const LabelSampler& sampler, const VonMisesSampler& move, ParticleView prev,
                     bool allow_switch,
                     std::span<int> labels, std::span<double> angles) {
  for (std::size_t n = 0; n < labels.size(); ++n) {
    labels[n] = allow_switch ? sampler.next(rng, prev.labels[n]) : prev.labels[n];
  }
  for (std::size_t m = 0; m < angles.size(); ++m) {
    angles[m] = move(rng, prev.angles[m]);
  }
}

void check_inputs(std::span<const ObservationFrame> observations, std::span<const WordSegment> words,
                  const ModelParams& params, const FilterConfig& config) {
  if (const auto issues = validate_params(params); !issues.empty()) {
    throw ValidationError("invalid model parameters: " + issues.front());
  }
  if (config.num_particles < 1) {
    throw ValidationError("particle count must be at least 1");
  }
  if (config.num_particles > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("particle count too large");
  }
  if (!(config.ess_threshold_fraction >= 0.0 && config.ess_threshold_fraction <= 1.0)) {
    throw ValidationError("ESS threshold fraction must lie in [0, 1]");
  }
  validate_words(words, observations.size(), params.num_channels);
}

}  // namespace

void ParticleEnsemble::resize(std::size_t r) {
  labels.resize(r * static_cast<std::size_t>(num_channels));
  angles.resize(r * static_cast<std::size_t>(num_speakers));
  log_weights.resize(r);
  weights.resize(r);
}

Particle sample_initial(Rng& rng, const ModelParams& params) {
  Particle p;
  p.labels.resize(static_cast<std::size_t>(params.num_channels));
  p.angles.resize(static_cast<std::size_t>(params.num_speakers));
  initial_into(rng, params.num_speakers, p.labels, p.angles);
  return p;
}

Particle sample_transition(Rng& rng, ParticleView prev, const ModelParams& params, bool allow_switch) {
  Particle p;
  p.labels.resize(prev.labels.size());
  p.angles.resize(prev.angles.size());
  transition_into(rng, LabelSampler(params), VonMisesSampler(params.sigma_move), prev, allow_switch, p.labels, p.angles);
  return p;
}

WeightUpdate update_log_weights(std::span<const double> prev_log_weights, std::span<const double> log_emissions,
                                std::size_t frame) {
  if (prev_log_weights.size() != log_emissions.size()) {
    throw ValidationError("weight and emission counts differ");
  }
  WeightUpdate out;
  out.log_weights.resize(log_emissions.size());
  double peak = kNegInf;
  for (std::size_t r = 0; r < log_emissions.size(); ++r) {
    const double lw = prev_log_weights[r] + log_emissions[r];
    out.log_weights[r] = std::isnan(lw) ? kNegInf : lw;
    peak = std::max(peak, out.log_weights[r]);
  }
  if (!std::isfinite(peak)) {
    throw ModelError("all particles have zero posterior mass", frame);
  }
  out.weights.resize(log_emissions.size());
  double total = 0.0;
  for (std::size_t r = 0; r < log_emissions.size(); ++r) {
    out.weights[r] = std::exp(out.log_weights[r] - peak);
    total += out.weights[r];
  }
  for (auto& w : out.weights) {
    w /= total;
  }
  out.log_normalizer = peak + std::log(total);
  return out;
}

WeightUpdate update_weights(std::span<const double> prev_weights, std::span<const double> log_emissions,
                            std::size_t frame) {
  std::vector<double> prev_log(prev_weights.size());
  std::transform(prev_weights.begin(), prev_weights.end(), prev_log.begin(),
                 [](double w) { return w > 0.0 ? std::log(w) : kNegInf; });
  return update_log_weights(prev_log, log_emissions, frame);
}

double effective_sample_size(std::span<const double> weights) {
  // (sum v)^2 / sum v^2 with v = w / max(w): equal to 1 / sum w^2 for normalized
  // weights, and exact for uniform and one-hot inputs.
  double peak = 0.0;
  for (const double w : weights) {
    peak = std::max(peak, w);
  }
  if (peak <= 0.0) {
    return 0.0;
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const double w : weights) {
    const double v = w / peak;
    sum += v;
    sum_sq += v * v;
  }
  return sum * sum / sum_sq;
}

std::vector<std::uint32_t> systematic_resample(Rng& rng, std::span<const double> weights) {
  const std::size_t r_count = weights.size();
  std::vector<std::uint32_t> out(r_count);
  if (r_count == 0) {
    return out;
  }
  const double step = 1.0 / static_cast<double>(r_count);
  const double offset = rng.uniform() * step;
  std::size_t idx = 0;
  double cumulative = weights[0];
  for (std::size_t k = 0; k < r_count; ++k) {
    const double point = offset + static_cast<double>(k) * step;
    while (idx + 1 < r_count && point >= cumulative) {
      ++idx;
      cumulative += weights[idx];
    }
    out[k] = static_cast<std::uint32_t>(idx);
  }
  return out;
}

void run_forward(std::span<const ObservationFrame> observations, std::span<const WordSegment> words,
                 const ModelParams& params, const EmissionConfig& emission, const FilterConfig& config,
                 const EnsembleSink& sink) {
  check_inputs(observations, words, params, config);
  const std::size_t r_count = config.num_particles;
  const auto n_ch = static_cast<std::size_t>(params.num_channels);
  const auto n_spk = static_cast<std::size_t>(params.num_speakers);
  const auto boundaries = word_boundary_mask(words, observations.size());
  const LabelSampler sampler(params);
  const VonMisesSampler move(params.sigma_move);
  const int threads = thread_count();

  ParticleEnsemble prev;
  ParticleEnsemble cur;
  cur.num_channels = prev.num_channels = params.num_channels;
  cur.num_speakers = prev.num_speakers = params.num_speakers;
  cur.resize(r_count);
  prev.resize(r_count);

  std::vector<std::uint32_t> parents;
  std::vector<double> prior_log(r_count, -std::log(static_cast<double>(r_count)));
  std::vector<double> log_emis(r_count);

  for (std::size_t t = 0; t < observations.size(); ++t) {
    const FrameEvidence evidence(observations[t], params, emission);
    const bool allow_switch = !config.restrict_switch_to_word_boundaries || boundaries[t];
    cur.t = t;
    cur.allow_switch = t == 0 || allow_switch;
    cur.resampled = false;

    const auto r_signed = static_cast<std::ptrdiff_t>(r_count);
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t rs = 0; rs < r_signed; ++rs) {
      const auto r = static_cast<std::size_t>(rs);
      std::span<int> labels(cur.labels.data() + r * n_ch, n_ch);
      std::span<double> angles(cur.angles.data() + r * n_spk, n_spk);
      if (t == 0) {
        Rng rng = purpose_stream(config.seed, t, r, StreamPurpose::kInitial);
        initial_into(rng, params.num_speakers, labels, angles);
      } else {
        Rng rng = purpose_stream(config.seed, t, r, StreamPurpose::kTransition);
        const std::size_t parent = parents.empty() ? r : parents[r];
        transition_into(rng, sampler, move, prev.particle(parent), allow_switch, labels, angles);
      }
      log_emis[r] = evidence.log_emission(cur.particle(r));
    }

    auto update = update_log_weights(prior_log, log_emis, t);
    cur.log_weights = std::move(update.log_weights);
    cur.weights = std::move(update.weights);
    if (t == 0) {
      cur.ancestors.clear();
    } else if (parents.empty()) {
      cur.ancestors.resize(r_count);
      for (std::size_t r = 0; r < r_count; ++r) {
        cur.ancestors[r] = static_cast<std::uint32_t>(r);
      }
    } else {
      cur.ancestors = parents;
    }

    const double ess = effective_sample_size(cur.weights);
    cur.resampled = ess < config.ess_threshold_fraction * static_cast<double>(r_count);
    if (cur.resampled) {
      Rng rng = purpose_stream(config.seed, t, 0, StreamPurpose::kResample);
      parents = systematic_resample(rng, cur.weights);
      std::fill(prior_log.begin(), prior_log.end(), -std::log(static_cast<double>(r_count)));
    } else {
      parents.clear();
      for (std::size_t r = 0; r < r_count; ++r) {
        prior_log[r] = cur.weights[r] > 0.0 ? std::log(cur.weights[r]) : kNegInf;
      }
    }

    sink(cur);
    std::swap(prev, cur);
  }
}

std::vector<ParticleEnsemble> forward_pass(std::span<const ObservationFrame> observations,
                                           std::span<const WordSegment> words, const ModelParams& params,
                                           const EmissionConfig& emission, const FilterConfig& config) {
  std::vector<ParticleEnsemble> out;
  out.reserve(observations.size());
  run_forward(observations, words, params, emission, config,
              [&out](const ParticleEnsemble& e) { out.push_back(e); });
  return out;
}

}  // namespace sspf
