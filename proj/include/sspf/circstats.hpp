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

#ifndef SSPF_CIRCSTATS_HPP_
#define SSPF_CIRCSTATS_HPP_

#include <numbers>
#include <span>

#include "sspf/rng.hpp"

/**
 * \file
 * \brief Circular statistics: angle wrapping, von Mises density and sampling,
 * weighted circular means and the modified Bessel functions they need.
 */

namespace sspf {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps x into (-pi, pi]. Throws ValidationError for non-finite input.
double wrap_angle(double x);

/// log I0(x) for x >= 0. Power series below 20, asymptotic expansion above.
double log_bessel_i0(double x);

/// log I1(x) for x >= 0 (-inf at 0).
double log_bessel_i1(double x);

/// I1(x) / I0(x), the mean resultant length of a von Mises law with concentration x.
double bessel_ratio_i1_i0(double x);

/// Normalized von Mises log-density, kappa * cos(x - mu) - log(2 pi I0(kappa)).
double vm_logpdf(double x, double mu, double kappa);

/// Draws from von Mises(mu, kappa).
/**
 * Best-Fisher rejection sampler with a wrapped Cauchy envelope. Above
 * kappa = 1e6 the envelope constants lose precision, so a wrapped normal with
 * variance 1/kappa is used instead; the two laws agree to O(1/kappa) there.
 */
double vm_sample(Rng& rng, double mu, double kappa);

/// vm_sample with the rejection envelope precomputed for one concentration.
/// Draws are identical to vm_sample for the same generator state.
class VonMisesSampler {
 public:
  explicit VonMisesSampler(double kappa);
  double operator()(Rng& rng, double mu) const;

 private:
  double kappa_;
  double s_{0.0};
};

struct CircularSummary {
  double mean{0.0};
  double resultant{0.0};
};

/// Weighted circular mean and mean resultant length.
/**
 * Weights must be nonnegative and sum to one. A resultant below 1e-12 is
 * treated as degenerate and reports mean 0.
 */
CircularSummary circ_mean_resultant(std::span<const double> angles, std::span<const double> weights);

/// Equal-weight overload.
CircularSummary circ_mean_resultant(std::span<const double> angles);

}  // namespace sspf

#endif  // SSPF_CIRCSTATS_HPP_
