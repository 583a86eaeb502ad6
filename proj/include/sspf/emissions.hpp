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

#ifndef SSPF_EMISSIONS_HPP_
#define SSPF_EMISSIONS_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "sspf/model.hpp"

namespace sspf {

enum class LocationFeature { kNone, kDoa, kSsl };

LocationFeature parse_location_feature(std::string_view name);
std::string_view to_string(LocationFeature feature);

struct EmissionConfig {
  LocationFeature location_feature{LocationFeature::kSsl};
  double gamma{0.0};
  double kappa{0.0};

  /// Copies gamma and kappa from params; kappa becomes 0 when no location feature is used.
  static EmissionConfig from_params(const ModelParams& params, LocationFeature feature);
};

/// gamma * (mu_q . d). The vMF normalizer is shared by every particle and dropped.
double log_emis_dvec(std::span<const double> dvec, std::span<const double> centroid, double gamma);

/// Full von Mises log-density of the observed DOA around the speaker's location.
double log_emis_doa(double doa, double theta, double kappa);

/// rho * cos(eta - theta), the SSL emission up to factors shared across particles.
double log_emis_ssl(double rho, double eta, double theta);

/// Joint log emission of one frame for one particle; silent channels contribute 0.
double frame_log_emission(const ObservationFrame& obs, ParticleView particle, const ModelParams& params,
                          const EmissionConfig& cfg);

/// Per-frame quantities that do not depend on the particle.
/**
 * Building this once per frame turns each particle evaluation into N table
 * lookups and N cosines, which is what the filter and the grid oracle use.
 * A DOA request on a channel that only carries an SSL uses the SSL mode; a
 * channel lacking the requested location feature contributes no location term.
 */
class FrameEvidence {
 public:
  FrameEvidence(const ObservationFrame& obs, const ModelParams& params, const EmissionConfig& cfg);

  [[nodiscard]] double log_emission(ParticleView particle) const;

  /// True when no channel is active, i.e. every particle gets the same (zero) emission.
  [[nodiscard]] bool silent() const noexcept { return channels_.empty(); }

 private:
  struct Channel {
    int channel{0};
    // gamma * mu_m . d for every speaker m
    std::vector<double> speaker_score;
    LocationFeature location{LocationFeature::kNone};
    // DOA: (angle, kappa, -log(2 pi I0(kappa))); SSL: (eta, rho, 0)
    double mean{0.0};
    double concentration{0.0};
    double offset{0.0};
  };

  std::vector<Channel> channels_;
};

}  // namespace sspf

#endif  // SSPF_EMISSIONS_HPP_
