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

#ifndef SSPF_SIMKIT_HPP_
#define SSPF_SIMKIT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sspf/decode.hpp"
#include "sspf/emissions.hpp"
#include "sspf/model.hpp"

/**
 * \file
 * \brief Synthetic meetings with moving speakers, and an exact forward-backward
 * oracle over a discretized location grid.
 */

namespace sspf {

/// Forces one speaker silent over [start, start + length).
struct ForcedSilence {
  int speaker{0};
  std::size_t start{0};
  std::size_t length{0};
};

struct SimConfig {
  int num_speakers{4};
  int num_channels{2};
  std::size_t num_frames{1500};
  double frame_seconds{0.4};
  /// Location random-walk concentration.
  double sigma_move{200.0};
  /// Concentration of the discretized von Mises that forms each SSL vector.
  double kappa{20.0};
  /// Concentration of the angular noise added before forming the SSL; defaults to kappa.
  std::optional<double> doa_noise;
  double gamma{15.0};
  int embedding_dim{128};
  int num_bins{360};
  /// Probability that a channel keeps its state (silence or speaker) from one frame to the next.
  double turn_persistence{0.9};
  /// Probability that a channel changing state falls silent.
  double silence_probability{0.2};
  std::size_t word_min_frames{1};
  std::size_t word_max_frames{4};
  std::uint64_t seed{0};
  std::optional<ForcedSilence> forced_silence;

  [[nodiscard]] double noise_concentration() const { return doa_noise.value_or(kappa); }
};

/// Throws ValidationError on out-of-range fields.
void validate_sim_config(const SimConfig& config);

struct GroundTruth {
  /// T x M true angles, row major.
  std::vector<double> locations;
  /// T x N active speaker per channel, -1 for silence.
  std::vector<int> active;
  /// True speaker per word.
  std::vector<int> word_speakers;
  int num_speakers{0};
  int num_channels{0};

  [[nodiscard]] double location(std::size_t t, int m) const {
    return locations[t * static_cast<std::size_t>(num_speakers) + static_cast<std::size_t>(m)];
  }
  [[nodiscard]] int speaker(std::size_t t, int n) const {
    return active[t * static_cast<std::size_t>(num_channels) + static_cast<std::size_t>(n)];
  }
};

struct SimulatedMeeting {
  std::vector<ObservationFrame> observations;
  std::vector<WordSegment> words;
  GroundTruth truth;
  /// Parameters of the generating process, usable as a matched model.
  ModelParams params;
};

SimulatedMeeting simulate_meeting(const SimConfig& config);

/// Draws a unit vector from a von Mises-Fisher law (Wood's rejection sampler).
std::vector<double> vmf_sample(Rng& rng, std::span<const double> mean_direction, double concentration);

struct OraclePosteriors {
  PosteriorTable filtered;
  PosteriorTable smoothed;
};

/// Exact filtered and smoothed speaker marginals on a discretized location grid.
/**
 * The joint state is (labels, location bin per speaker); the state count
 * M^N * G^M must not exceed 1e5. Locations move by the von Mises kernel
 * between bin centers, renormalized over bins. Emissions are evaluated at bin
 * centers with the same proportional forms as the particle filter.
 */
OraclePosteriors grid_hmm_posterior(std::span<const ObservationFrame> observations,
                                    std::span<const WordSegment> words, const ModelParams& params,
                                    const EmissionConfig& emission, int grid_bins, bool restrict_to_boundaries = false);

/// Default active-frame threshold for the movement test: 30 s per hour-long meeting, scaled to T.
std::size_t default_movement_min_frames(std::size_t num_frames);

/// True when some pair of disjoint arcs of `min_arc` radians splits the speaker's
/// active locations into two regions holding at least `min_frames` active frames each.
bool speaker_moves(const GroundTruth& truth, int speaker, std::size_t min_frames, double min_arc);

/// True when any speaker moves in the above sense (with min_arc = pi/6).
bool meeting_has_movement(const GroundTruth& truth, std::size_t min_frames);

}  // namespace sspf

#endif  // SSPF_SIMKIT_HPP_
