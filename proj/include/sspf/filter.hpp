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

#ifndef SSPF_FILTER_HPP_
#define SSPF_FILTER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sspf/emissions.hpp"
#include "sspf/model.hpp"
#include "sspf/rng.hpp"

/**
 * \file
 * \brief Sequential importance resampling forward pass over the joint
 * speaker-label / speaker-location state.
 */

namespace sspf {

struct FilterConfig {
  std::size_t num_particles{20000};
  /// Resample when ESS < fraction * R. 0 disables resampling.
  double ess_threshold_fraction{0.5};
  /// Only let speaker labels change at frames where a word starts.
  bool restrict_switch_to_word_boundaries{false};
  std::uint64_t seed{0};
};

/// Particles and importance weights for one frame, stored as structure of arrays.
struct ParticleEnsemble {
  std::size_t t{0};
  int num_channels{0};
  int num_speakers{0};
  /// R x N speaker labels, row major.
  std::vector<int> labels;
  /// R x M speaker angles, row major.
  std::vector<double> angles;
  /// Unnormalized log weights; weights = exp(log_weights - max) / sum.
  std::vector<double> log_weights;
  std::vector<double> weights;
  /// Whether the weights at this frame triggered resampling before the next prediction.
  bool resampled{false};
  /// Whether speaker labels were allowed to change when predicting this frame.
  bool allow_switch{true};
  /// Parent of each particle in the previous frame's ensemble; empty at the first frame.
  std::vector<std::uint32_t> ancestors;

  [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }

  [[nodiscard]] ParticleView particle(std::size_t r) const {
    const auto n = static_cast<std::size_t>(num_channels);
    const auto m = static_cast<std::size_t>(num_speakers);
    return {std::span<const int>(labels).subspan(r * n, n), std::span<const double>(angles).subspan(r * m, m)};
  }

  void resize(std::size_t r);
};

Particle sample_initial(Rng& rng, const ModelParams& params);

Particle sample_transition(Rng& rng, ParticleView prev, const ModelParams& params, bool allow_switch);

struct WeightUpdate {
  std::vector<double> weights;
  std::vector<double> log_weights;
  /// log of sum_r prev_r * exp(log_emission_r).
  double log_normalizer{0.0};
};

/// w_r proportional to prev_r * exp(log_emission_r), normalized in the log domain.
/// Throws ModelError (tagged with `frame`) when every particle has zero mass.
WeightUpdate update_weights(std::span<const double> prev_weights, std::span<const double> log_emissions,
                            std::size_t frame = 0);

/// Variant taking previous log weights directly (avoids a log/exp round trip).
WeightUpdate update_log_weights(std::span<const double> prev_log_weights, std::span<const double> log_emissions,
                                std::size_t frame = 0);

double effective_sample_size(std::span<const double> weights);

/// Systematic resampling with one uniform offset; ancestor indices come out sorted ascending.
std::vector<std::uint32_t> systematic_resample(Rng& rng, std::span<const double> weights);

using EnsembleSink = std::function<void(const ParticleEnsemble&)>;

/// Streaming forward pass: `sink` sees every frame's ensemble in order, only the current one is retained.
void run_forward(std::span<const ObservationFrame> observations, std::span<const WordSegment> words,
                 const ModelParams& params, const EmissionConfig& emission, const FilterConfig& config,
                 const EnsembleSink& sink);

/// Forward pass retaining every frame (needed by the smoother).
std::vector<ParticleEnsemble> forward_pass(std::span<const ObservationFrame> observations,
                                           std::span<const WordSegment> words, const ModelParams& params,
                                           const EmissionConfig& emission, const FilterConfig& config);

}  // namespace sspf

#endif  // SSPF_FILTER_HPP_
