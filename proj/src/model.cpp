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

#include "sspf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sspf/circstats.hpp"
#include "sspf/errors.hpp"

namespace sspf {

namespace {

constexpr double kSslSumTolerance = 1e-9;
constexpr double kSslRenormTolerance = 1e-6;
constexpr double kUnitNormTolerance = 1e-6;
constexpr double kRowSumTolerance = 1e-9;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) {
    s += x * x;
  }
  return std::sqrt(s);
}

}  // namespace

BinGeometry::BinGeometry(int num_bins) {
  if (num_bins < 1) {
    throw ValidationError("bin count must be positive");
  }
  const auto n = static_cast<std::size_t>(num_bins);
  centers_.resize(n);
  cos_.resize(n);
  sin_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    centers_[j] = -kPi + (static_cast<double>(j) + 0.5) * kTwoPi / static_cast<double>(num_bins);
    cos_[j] = std::cos(centers_[j]);
    sin_[j] = std::sin(centers_[j]);
  }
}

double BinGeometry::width() const noexcept {
  return centers_.empty() ? 0.0 : kTwoPi / static_cast<double>(centers_.size());
}

const ChannelObservation* ObservationFrame::find(int channel) const noexcept {
  for (const auto& c : channels) {
    if (c.channel == channel) {
      return &c;
    }
  }
  return nullptr;
}

double ssl_mode_doa(std::span<const double> ssl, const BinGeometry& bins) {
  if (ssl.size() != static_cast<std::size_t>(bins.size())) {
    throw ValidationError("SSL length does not match bin count");
  }
  // max_element returns the first maximum, i.e. the lowest index on ties.
  const auto it = std::max_element(ssl.begin(), ssl.end());
  return bins.center(static_cast<int>(it - ssl.begin()));
}

SslStats ssl_equiv_stats(std::span<const double> ssl, double kappa, const BinGeometry& bins) {
  if (ssl.size() != static_cast<std::size_t>(bins.size())) {
    throw ValidationError("SSL length does not match bin count");
  }
  double c = 0.0;
  double s = 0.0;
  const auto cs = bins.cosines();
  const auto sn = bins.sines();
  for (std::size_t i = 0; i < ssl.size(); ++i) {
    c += ssl[i] * cs[i];
    s += ssl[i] * sn[i];
  }
  const double r = std::hypot(c, s);
  SslStats out;
  out.rho = kappa * r;
  out.eta = r < 1e-12 ? 0.0 : wrap_angle(std::atan2(s, c));
  return out;
}

SslVector discretized_vm(double theta, double kappa, const BinGeometry& bins) {
  const auto centers = bins.centers();
  SslVector out(centers.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    out[i] = kappa * std::cos(centers[i] - theta);
    peak = std::max(peak, out[i]);
  }
  double total = 0.0;
  for (auto& v : out) {
    v = std::exp(v - peak);
    total += v;
  }
  for (auto& v : out) {
    v /= total;
  }
  return out;
}

double denominator_profile(double kappa, int num_bins, int grid) {
  if (grid < 100) {
    throw ValidationError("denominator profile needs at least 100 grid points");
  }
  if (!(kappa >= 0.0)) {
    throw ValidationError("concentration must be nonnegative");
  }
  const BinGeometry bins(num_bins);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double mean = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double theta = -kPi + kTwoPi * static_cast<double>(g) / static_cast<double>(grid);
    double f = 0.0;
    for (const double b : bins.centers()) {
      f += std::exp(kappa * (std::cos(b - theta) - 1.0));
    }
    lo = std::min(lo, f);
    hi = std::max(hi, f);
    mean += f;
  }
  mean /= static_cast<double>(grid);
  return (hi - lo) / mean;
}

std::vector<std::string> validate_params(const ModelParams& p) {
  std::vector<std::string> issues;
  const auto m = static_cast<std::size_t>(std::max(p.num_speakers, 0));
  if (p.num_speakers < 1) {
    issues.emplace_back("speaker count must be at least 1");
  }
  if (p.num_channels < 1) {
    issues.emplace_back("channel count must be at least 1");
  }
  if (p.centroids.size() != m) {
    issues.push_back("expected " + std::to_string(m) + " centroids, got " + std::to_string(p.centroids.size()));
  }
  const std::size_t dim = p.embedding_dim();
  if (dim == 0 && !p.centroids.empty()) {
    issues.emplace_back("centroids have zero dimension");
  }
  for (std::size_t i = 0; i < p.centroids.size(); ++i) {
    if (p.centroids[i].size() != dim) {
      issues.push_back("centroid " + std::to_string(i) + " has dimension " +
                       std::to_string(p.centroids[i].size()) + ", expected " + std::to_string(dim));
      continue;
    }
    const double n = norm2(p.centroids[i]);
    if (!(std::abs(n - 1.0) <= kUnitNormTolerance)) {
      issues.push_back("centroid " + std::to_string(i) + " is not unit norm (norm " + std::to_string(n) + ")");
    }
  }
  if (p.transitions.size() != m) {
    issues.push_back("transition matrix has " + std::to_string(p.transitions.size()) + " rows, expected " +
                     std::to_string(m));
  }
  for (std::size_t i = 0; i < p.transitions.size(); ++i) {
    const auto& row = p.transitions[i];
    if (row.size() != m) {
      issues.push_back("transition row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                       " entries, expected " + std::to_string(m));
      continue;
    }
    double sum = 0.0;
    bool negative = false;
    for (const double a : row) {
      negative = negative || !(a >= 0.0);
      sum += a;
    }
    if (negative) {
      issues.push_back("transition row " + std::to_string(i) + " has a negative or non-finite entry");
    }
    if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
      issues.push_back("transition row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
  const auto check_conc = [&](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      issues.push_back(std::string(name) + " must be finite and nonnegative");
    }
  };
  check_conc(p.gamma, "gamma");
  check_conc(p.sigma_move, "sigma_move");
  check_conc(p.kappa, "kappa");
  if (p.bins.size() < 1) {
    issues.emplace_back("bin geometry is empty");
  }
  return issues;
}

void normalize_ssl(SslVector& ssl, std::size_t expected_bins) {
  if (ssl.size() != expected_bins) {
    throw ValidationError("SSL vector has " + std::to_string(ssl.size()) + " bins, expected " +
                          std::to_string(expected_bins));
  }
  double sum = 0.0;
  for (const double v : ssl) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("SSL vector has a negative or non-finite entry");
    }
    sum += v;
  }
  const double err = std::abs(sum - 1.0);
  if (err <= kSslSumTolerance) {
    return;
  }
  if (err <= kSslRenormTolerance) {
    for (auto& v : ssl) {
      v /= sum;
    }
    return;
  }
  throw ValidationError("SSL vector sums to " + std::to_string(sum));
}

void validate_frame(ObservationFrame& frame, const ModelParams& params) {
  const std::size_t dim = params.embedding_dim();
  std::vector<bool> seen(static_cast<std::size_t>(std::max(params.num_channels, 0)), false);
  for (auto& c : frame.channels) {
    const std::string where = "frame " + std::to_string(frame.t) + " channel " + std::to_string(c.channel);
    if (c.channel < 0 || c.channel >= params.num_channels) {
      throw ValidationError(where + ": channel out of range");
    }
    if (seen[static_cast<std::size_t>(c.channel)]) {
      throw ValidationError(where + ": duplicate channel record");
    }
    seen[static_cast<std::size_t>(c.channel)] = true;
    if (c.dvec.size() != dim) {
      throw ValidationError(where + ": d-vector dimension " + std::to_string(c.dvec.size()) + ", expected " +
                            std::to_string(dim));
    }
    if (!(std::abs(norm2(c.dvec) - 1.0) <= kUnitNormTolerance)) {
      throw ValidationError(where + ": d-vector is not unit norm");
    }
    if (c.ssl) {
      try {
        normalize_ssl(*c.ssl, static_cast<std::size_t>(params.bins.size()));
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
    }
    if (c.doa) {
      if (!std::isfinite(*c.doa)) {
        throw ValidationError(where + ": DOA is not finite");
      }
      c.doa = wrap_angle(*c.doa);
    }
  }
}

void validate_words(std::span<const WordSegment> words, std::size_t num_frames, int num_channels) {
  for (const auto& w : words) {
    const std::string where = "word " + std::to_string(w.id);
    if (w.start > w.end) {
      throw ValidationError(where + ": start after end");
    }
    if (w.end >= num_frames) {
      throw ValidationError(where + ": ends beyond the last frame");
    }
    if (w.channel < 0 || w.channel >= num_channels) {
      throw ValidationError(where + ": channel out of range");
    }
  }
}

std::vector<bool> word_boundary_mask(std::span<const WordSegment> words, std::size_t num_frames) {
  std::vector<bool> mask(num_frames, false);
  for (const auto& w : words) {
    if (w.start < num_frames) {
      mask[w.start] = true;
    }
  }
  return mask;
}

}  // namespace sspf
