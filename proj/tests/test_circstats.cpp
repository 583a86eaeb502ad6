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

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sspf/circstats.hpp"
#include "sspf/errors.hpp"

using namespace sspf;

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(-kPi) == kPi);
  CHECK(wrap_angle(kPi) == kPi);
  CHECK(wrap_angle(-3.0 * kPi / 2.0) == doctest::Approx(kPi / 2.0));
  CHECK_THROWS_AS(wrap_angle(std::nan("")), ValidationError);
  CHECK_THROWS_AS(wrap_angle(INFINITY), ValidationError);

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(gen);
    const double w = wrap_angle(x);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(wrap_angle(w) == w);
    CHECK(std::abs(std::remainder(x - w, kTwoPi)) < 1e-12);
  }
}

TEST_CASE("log Bessel functions match the power series across the switch point") {
  for (const double x : {1e-3, 0.5, 1.0, 2.0, 5.0, 19.999, 20.0, 20.001, 35.0, 60.0}) {
    const auto i0 = sspf::testing::bessel_series(0, x);
    const auto i1 = sspf::testing::bessel_series(1, x);
    CHECK(log_bessel_i0(x) == doctest::Approx(static_cast<double>(std::log(i0))).epsilon(1e-13));
    CHECK(log_bessel_i1(x) == doctest::Approx(static_cast<double>(std::log(i1))).epsilon(1e-13));
    CHECK(bessel_ratio_i1_i0(x) == doctest::Approx(static_cast<double>(i1 / i0)).epsilon(1e-12));
  }
  CHECK(log_bessel_i0(0.0) == 0.0);
  CHECK(bessel_ratio_i1_i0(0.0) == 0.0);
  // large arguments stay finite (reference values from arbitrary precision)
  CHECK(log_bessel_i0(100.0) == doctest::Approx(96.779732689942584).epsilon(1e-14));
  CHECK(log_bessel_i0(1000.0) == doctest::Approx(995.62730888986946).epsilon(1e-14));
}

TEST_CASE("vm_logpdf") {
  CHECK(vm_logpdf(0.3, 0.3, 0.0) == doctest::Approx(-1.8378770664093453).epsilon(1e-14));
  // I0(1) by series: 1.2660658777520084
  const double i0_1 = static_cast<double>(sspf::testing::bessel_series(0, 1.0L));
  CHECK(i0_1 == doctest::Approx(1.2660658777520084).epsilon(1e-15));
  CHECK(vm_logpdf(0.2 + kPi, 0.2, 1.0) == doctest::Approx(-1.0 - std::log(kTwoPi * i0_1)).epsilon(1e-14));
  CHECK(vm_logpdf(0.2 + kPi, 0.2, 1.0) == doctest::Approx(-3.0737914249165241).epsilon(1e-14));
  for (const double a : {0.1, 1.0, 2.5}) {
    CHECK(vm_logpdf(0.7 + a, 0.7, 3.0) == doctest::Approx(vm_logpdf(0.7 - a, 0.7, 3.0)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(vm_logpdf(0.0, 0.0, -1.0), ValidationError);
}

TEST_CASE("vm_logpdf integrates to one") {
  constexpr int kGrid = 10000;
  for (const double kappa : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    double sum = 0.0;
    // periodic trapezoid rule
    for (int i = 0; i < kGrid; ++i) {
      const double x = -kPi + kTwoPi * i / kGrid;
      sum += std::exp(vm_logpdf(x, 0.4, kappa));
    }
    CHECK(sum * kTwoPi / kGrid == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("vm_sample with zero concentration is uniform") {
  Rng rng(11);
  std::vector<double> xs(100000);
  for (auto& x : xs) {
    x = vm_sample(rng, 1.0, 0.0);
  }
  CHECK(sspf::testing::ks_uniform(xs, -kPi, kPi) < sspf::testing::ks_critical_001(xs.size()));
}

TEST_CASE("vm_sample moments at kappa = 4") {
  Rng rng(12);
  std::vector<double> xs(100000);
  for (auto& x : xs) {
    x = vm_sample(rng, 1.0, 4.0);
  }
  const auto s = circ_mean_resultant(xs);
  CHECK(std::abs(s.mean - 1.0) < 0.02);
  const double expected = static_cast<double>(sspf::testing::bessel_series(1, 4.0L) /
                                               sspf::testing::bessel_series(0, 4.0L));
  CHECK(std::abs(s.resultant - expected) < 0.01 * expected);
}

TEST_CASE("vm_sample is reproducible and handles extreme concentrations") {
  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 100; ++i) {
    CHECK(vm_sample(a, -2.0, 7.0) == vm_sample(b, -2.0, 7.0));
  }
  Rng rng(5);
  for (const double kappa : {1e-6, 1e4, 5e5, 2e6, 1e9}) {
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double x = vm_sample(rng, kPi - 1e-3, kappa);
      CHECK(x > -kPi);
      CHECK(x <= kPi);
      worst = std::max(worst, std::abs(wrap_angle(x - (kPi - 1e-3))));
    }
    if (kappa >= 1e4) {
      CHECK(worst < 6.0 / std::sqrt(kappa));
    }
  }
  CHECK_THROWS_AS(vm_sample(rng, 0.0, -0.5), ValidationError);
}

TEST_CASE("circ_mean_resultant") {
  const std::vector<double> two{0.0, kPi / 2.0};
  const std::vector<double> half{0.5, 0.5};
  const auto s = circ_mean_resultant(two, half);
  CHECK(s.mean == doctest::Approx(kPi / 4.0));
  CHECK(s.resultant == doctest::Approx(std::cos(kPi / 4.0)));

  std::vector<double> ring(12);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    ring[i] = -kPi + kTwoPi * static_cast<double>(i) / 12.0;
  }
  const auto r = circ_mean_resultant(ring);
  CHECK(r.resultant < 1e-12);
  CHECK(r.mean == 0.0);

  const std::vector<double> one{2.2};
  const std::vector<double> w1{1.0};
  CHECK(circ_mean_resultant(one, w1).mean == doctest::Approx(2.2));
  CHECK(circ_mean_resultant(one, w1).resultant == doctest::Approx(1.0));
  CHECK_THROWS_AS(circ_mean_resultant(std::vector<double>{}), ValidationError);
}

TEST_CASE("circ_mean_resultant is rotation invariant") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(7);
    for (auto& x : a) {
      x = u(gen);
    }
    const auto w = sspf::testing::random_simplex(gen, a.size());
    const double c = u(gen);
    std::vector<double> rotated(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      rotated[i] = wrap_angle(a[i] + c);
    }
    const auto s0 = circ_mean_resultant(a, w);
    const auto s1 = circ_mean_resultant(rotated, w);
    CHECK(s1.resultant == doctest::Approx(s0.resultant).epsilon(1e-12));
    if (s0.resultant > 1e-6) {
      CHECK(std::abs(wrap_angle(s1.mean - wrap_angle(s0.mean + c))) < 1e-9);
    }
  }
}
