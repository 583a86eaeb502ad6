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

#include "sspf/circstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "sspf/errors.hpp"

namespace sspf {

namespace {

constexpr double kSeriesLimit = 20.0;
constexpr double kDegenerateResultant = 1e-12;

// Power series for I_nu(x), nu in {0, 1}.
double bessel_series(int nu, double x) {
  const double q = 0.25 * x * x;
  double term = nu == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + nu));
    sum += term;
    if (term < sum * 1e-17) {
      break;
    }
  }
  return sum;
}

// log I_nu(x) from the large-argument expansion
// I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k.
double log_bessel_asymptotic(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (static_cast<double>(k) * 8.0 * x);
    if (std::abs(next) >= std::abs(term)) {
      break;
    }
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17) {
      break;
    }
  }
  return x - 0.5 * std::log(kTwoPi * x) + std::log(sum);
}

double log_bessel(int nu, double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw ValidationError("bessel argument must be finite and nonnegative, got " + std::to_string(x));
  }
  if (x < kSeriesLimit) {
    if (nu == 1 && x == 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
    return std::log(bessel_series(nu, x));
  }
  return log_bessel_asymptotic(nu, x);
}

void check_kappa(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw ValidationError("concentration must be finite and nonnegative, got " + std::to_string(kappa));
  }
}

}  // namespace

double wrap_angle(double x) {
  if (!std::isfinite(x)) {
    throw ValidationError("cannot wrap a non-finite angle");
  }
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) {
    r += kTwoPi;
  }
  if (r > kPi) {
    r = kPi;
  }
  return r;
}

double log_bessel_i0(double x) { return log_bessel(0, x); }

double log_bessel_i1(double x) { return log_bessel(1, x); }

double bessel_ratio_i1_i0(double x) {
  if (x == 0.0) {
    return 0.0;
  }
  return std::exp(log_bessel_i1(x) - log_bessel_i0(x));
}

double vm_logpdf(double x, double mu, double kappa) {
  check_kappa(kappa);
  return kappa * std::cos(x - mu) - std::log(kTwoPi) - log_bessel_i0(kappa);
}

double vm_sample(Rng& rng, double mu, double kappa) { return VonMisesSampler(kappa)(rng, mu); }

VonMisesSampler::VonMisesSampler(double kappa) : kappa_{kappa} {
  check_kappa(kappa);
  if (kappa < 1e-8 || kappa > 1e6) {
    return;
  }
  if (kappa < 1e-5) {
    s_ = 1.0 / kappa + kappa;
  } else {
    const double r = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (r - std::sqrt(2.0 * r)) / (2.0 * kappa);
    s_ = (1.0 + rho * rho) / (2.0 * rho);
  }
}

double VonMisesSampler::operator()(Rng& rng, double mu) const {
  if (kappa_ < 1e-8) {
    return wrap_angle(kPi * (2.0 * rng.uniform() - 1.0));
  }
  if (kappa_ > 1e6) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(kappa_));
    return wrap_angle(mu + normal(rng));
  }
  double w = 0.0;
  while (true) {
    const double z = std::cos(kPi * rng.uniform());
    w = (1.0 + s_ * z) / (s_ + z);
    const double y = kappa_ * (s_ - w);
    const double v = rng.uniform_open();
    if (y * (2.0 - y) - v >= 0.0 || std::log(y / v) + 1.0 - y >= 0.0) {
      break;
    }
  }
  double angle = std::acos(std::clamp(w, -1.0, 1.0));
  if (rng.uniform() < 0.5) {
    angle = -angle;
  }
  double x = mu + angle;
  if (std::abs(mu) <= kPi) {
    // |x| <= 2 pi, one shift suffices
    if (x > kPi) {
      x -= kTwoPi;
    } else if (x <= -kPi) {
      x += kTwoPi;
    }
    return x;
  }
  return wrap_angle(x);
}

CircularSummary circ_mean_resultant(std::span<const double> angles, std::span<const double> weights) {
  if (angles.empty()) {
    throw ValidationError("circular mean of an empty sample");
  }
  if (angles.size() != weights.size()) {
    throw ValidationError("angle and weight counts differ");
  }
  double c = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    c += weights[i] * std::cos(angles[i]);
    s += weights[i] * std::sin(angles[i]);
  }
  const double resultant = std::min(1.0, std::hypot(c, s));
  if (resultant < kDegenerateResultant) {
    return {0.0, resultant};
  }
  return {wrap_angle(std::atan2(s, c)), resultant};
}

CircularSummary circ_mean_resultant(std::span<const double> angles) {
  if (angles.empty()) {
    throw ValidationError("circular mean of an empty sample");
  }
  double c = 0.0;
  double s = 0.0;
  for (const double a : angles) {
    c += std::cos(a);
    s += std::sin(a);
  }
  const double n = static_cast<double>(angles.size());
  const double resultant = std::min(1.0, std::hypot(c, s) / n);
  if (resultant < kDegenerateResultant) {
    return {0.0, resultant};
  }
  return {wrap_angle(std::atan2(s, c)), resultant};
}

}  // namespace sspf
