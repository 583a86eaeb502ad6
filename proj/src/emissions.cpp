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

#include "sspf/emissions.hpp"

#include <cmath>
#include <string>

#include "sspf/circstats.hpp"
#include "sspf/errors.hpp"

namespace sspf {

LocationFeature parse_location_feature(std::string_view name) {
  if (name == "none") {
    return LocationFeature::kNone;
  }
  if (name == "doa") {
    return LocationFeature::kDoa;
  }
  if (name == "ssl") {
    return LocationFeature::kSsl;
  }
  throw ValidationError("unknown location feature '" + std::string(name) + "' (expected none, doa or ssl)");
}

std::string_view to_string(LocationFeature feature) {
  switch (feature) {
    case LocationFeature::kNone:
      return "none";
    case LocationFeature::kDoa:
      return "doa";
    case LocationFeature::kSsl:
      return "ssl";
  }
  return "none";
}

EmissionConfig EmissionConfig::from_params(const ModelParams& params, LocationFeature feature) {
  EmissionConfig cfg;
  cfg.location_feature = feature;
  cfg.gamma = params.gamma;
  cfg.kappa = feature == LocationFeature::kNone ? 0.0 : params.kappa;
  return cfg;
}

double log_emis_dvec(std::span<const double> dvec, std::span<const double> centroid, double gamma) {
  if (dvec.size() != centroid.size()) {
    throw ValidationError("d-vector dimension " + std::to_string(dvec.size()) + " does not match centroid dimension " +
                          std::to_string(centroid.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < dvec.size(); ++i) {
    dot += dvec[i] * centroid[i];
  }
  return gamma * dot;
}

double log_emis_doa(double doa, double theta, double kappa) { return vm_logpdf(doa, theta, kappa); }

double log_emis_ssl(double rho, double eta, double theta) { return rho * std::cos(eta - theta); }

double frame_log_emission(const ObservationFrame& obs, ParticleView particle, const ModelParams& params,
                          const EmissionConfig& cfg) {
  double total = 0.0;
  for (const auto& c : obs.channels) {
    const int q = particle.labels[static_cast<std::size_t>(c.channel)];
    const double theta = particle.angles[static_cast<std::size_t>(q)];
    total += log_emis_dvec(c.dvec, params.centroids[static_cast<std::size_t>(q)], cfg.gamma);
    switch (cfg.location_feature) {
      case LocationFeature::kNone:
        break;
      case LocationFeature::kDoa:
        if (c.doa) {
          total += log_emis_doa(*c.doa, theta, cfg.kappa);
        } else if (c.ssl) {
          total += log_emis_doa(ssl_mode_doa(*c.ssl, params.bins), theta, cfg.kappa);
        }
        break;
      case LocationFeature::kSsl:
        if (c.ssl) {
          const auto stats = ssl_equiv_stats(*c.ssl, cfg.kappa, params.bins);
          total += log_emis_ssl(stats.rho, stats.eta, theta);
        }
        break;
    }
  }
  return total;
}

FrameEvidence::FrameEvidence(const ObservationFrame& obs, const ModelParams& params, const EmissionConfig& cfg) {
  channels_.reserve(obs.channels.size());
  for (const auto& c : obs.channels) {
    Channel ch;
    ch.channel = c.channel;
    ch.speaker_score.resize(params.centroids.size());
    for (std::size_t m = 0; m < params.centroids.size(); ++m) {
      ch.speaker_score[m] = log_emis_dvec(c.dvec, params.centroids[m], cfg.gamma);
    }
    switch (cfg.location_feature) {
      case LocationFeature::kNone:
        break;
      case LocationFeature::kDoa:
        if (c.doa || c.ssl) {
          ch.location = LocationFeature::kDoa;
          ch.mean = c.doa ? *c.doa : ssl_mode_doa(*c.ssl, params.bins);
          ch.concentration = cfg.kappa;
          ch.offset = -std::log(kTwoPi) - log_bessel_i0(cfg.kappa);
        }
        break;
      case LocationFeature::kSsl:
        if (c.ssl) {
          const auto stats = ssl_equiv_stats(*c.ssl, cfg.kappa, params.bins);
          ch.location = LocationFeature::kSsl;
          ch.mean = stats.eta;
          ch.concentration = stats.rho;
        }
        break;
    }
    channels_.push_back(std::move(ch));
  }
}

double FrameEvidence::log_emission(ParticleView particle) const {
  double total = 0.0;
  for (const auto& ch : channels_) {
    const int q = particle.labels[static_cast<std::size_t>(ch.channel)];
    total += ch.speaker_score[static_cast<std::size_t>(q)];
    if (ch.location != LocationFeature::kNone) {
      total += ch.concentration * std::cos(ch.mean - particle.angles[static_cast<std::size_t>(q)]) + ch.offset;
    }
  }
  return total;
}

}  // namespace sspf
