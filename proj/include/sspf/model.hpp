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

#ifndef SSPF_MODEL_HPP_
#define SSPF_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * \file
 * \brief Core data types of the switching state-space model and the SSL
 * feature utilities shared by the filter, the simulator and the oracle.
 *
 * Speaker labels are 0-based in memory. File formats use 1-based labels.
 */

namespace sspf {

/// Evenly spaced angular bin centers, b_j = -pi + (j + 1/2) 2pi / S.
class BinGeometry {
 public:
  BinGeometry() = default;
  explicit BinGeometry(int num_bins);

  [[nodiscard]] int size() const noexcept { return static_cast<int>(centers_.size()); }
  [[nodiscard]] double width() const noexcept;
  [[nodiscard]] std::span<const double> centers() const noexcept { return centers_; }
  [[nodiscard]] std::span<const double> cosines() const noexcept { return cos_; }
  [[nodiscard]] std::span<const double> sines() const noexcept { return sin_; }
  [[nodiscard]] double center(int j) const { return centers_.at(static_cast<std::size_t>(j)); }

 private:
  std::vector<double> centers_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

/// Categorical distribution over angular bins.
using SslVector = std::vector<double>;

/// Observation of one channel in one frame. Channels without a record are silent.
struct ChannelObservation {
  int channel{0};
  std::vector<double> dvec;
  std::optional<SslVector> ssl;
  std::optional<double> doa;
};

struct ObservationFrame {
  std::size_t t{0};
  std::vector<ChannelObservation> channels;

  /// Record for channel n, or nullptr when the channel is silent.
  [[nodiscard]] const ChannelObservation* find(int channel) const noexcept;
};

struct ModelParams {
  int num_speakers{0};
  int num_channels{0};
  /// Unit-norm speaker embedding centroids, one per speaker.
  std::vector<std::vector<double>> centroids;
  /// Row-stochastic speaker transition matrix, shared across channels.
  std::vector<std::vector<double>> transitions;
  double gamma{0.0};
  double sigma_move{0.0};
  double kappa{0.0};
  BinGeometry bins{360};

  [[nodiscard]] std::size_t embedding_dim() const noexcept {
    return centroids.empty() ? 0 : centroids.front().size();
  }
};

/// One hypothesis of the hidden state: per-channel active speakers and per-speaker angles.
struct Particle {
  std::vector<int> labels;
  std::vector<double> angles;
};

/// Non-owning view of one particle stored in a structure-of-arrays ensemble.
struct ParticleView {
  std::span<const int> labels;
  std::span<const double> angles;
};

inline ParticleView view_of(const Particle& p) { return {p.labels, p.angles}; }

struct WordSegment {
  int id{0};
  int channel{0};
  std::size_t start{0};
  std::size_t end{0};
};

struct SslStats {
  double rho{0.0};
  double eta{0.0};
};

/// DOA as the mode of the SSL; ties go to the lowest bin index.
double ssl_mode_doa(std::span<const double> ssl, const BinGeometry& bins);

/// Equivalent concentration and mean of an SSL vector under a discretised von Mises emission.
/**
 * rho = kappa * || sum_i s_i (cos b_i, sin b_i) ||, the O(S) form of the
 * double sum kappa * sqrt(sum_ij s_i s_j cos(b_i - b_j)). eta is the
 * s-weighted circular mean of the bin centers.
 */
SslStats ssl_equiv_stats(std::span<const double> ssl, double kappa, const BinGeometry& bins);

/// lambda_i proportional to exp(kappa cos(b_i - theta)), normalized with max subtraction.
SslVector discretized_vm(double theta, double kappa, const BinGeometry& bins);

/// Relative ripple (max - min) / mean of f(theta) = sum_j exp(kappa cos(b_j - theta)) over a theta grid.
double denominator_profile(double kappa, int num_bins, int grid);

/// Every violated ModelParams invariant, one message each. Empty means valid.
std::vector<std::string> validate_params(const ModelParams& params);

/// Checks and, within 1e-6, renormalizes an SSL vector. Throws ValidationError otherwise.
void normalize_ssl(SslVector& ssl, std::size_t expected_bins);

/// Validates a frame against params (channel range, d-vector norm and dimension, SSL shape).
/// Renormalizes SSL vectors within tolerance in place.
void validate_frame(ObservationFrame& frame, const ModelParams& params);

/// Validates words against the meeting length and channel count.
void validate_words(std::span<const WordSegment> words, std::size_t num_frames, int num_channels);

/// Frames at which some word starts on any channel.
std::vector<bool> word_boundary_mask(std::span<const WordSegment> words, std::size_t num_frames);

}  // namespace sspf

#endif  // SSPF_MODEL_HPP_
