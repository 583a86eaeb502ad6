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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "sspf/circstats.hpp"
#include "sspf/decode.hpp"
#include "sspf/errors.hpp"
#include "sspf/filter.hpp"
#include "sspf/parallel.hpp"
#include "sspf/simkit.hpp"

using namespace sspf;

namespace {

ModelParams two_by_two(int m) {
  ModelParams p;
  p.num_speakers = m;
  p.num_channels = 2;
  for (int i = 0; i < m; ++i) {
    std::vector<double> mu(static_cast<std::size_t>(m), 0.0);
    mu[static_cast<std::size_t>(i)] = 1.0;
    p.centroids.push_back(mu);
    p.transitions.emplace_back(static_cast<std::size_t>(m), 1.0 / m);
  }
  p.gamma = 2.0;
  p.sigma_move = 20.0;
  p.kappa = 1.0;
  p.bins = BinGeometry(36);
  return p;
}

bool same_ensembles(const std::vector<ParticleEnsemble>& a, const std::vector<ParticleEnsemble>& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].labels != b[t].labels || a[t].angles != b[t].angles || a[t].weights != b[t].weights ||
        a[t].log_weights != b[t].log_weights || a[t].ancestors != b[t].ancestors ||
        a[t].resampled != b[t].resampled) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("sample_initial") {
  Rng rng(1);
  auto single = two_by_two(1);
  for (int i = 0; i < 100; ++i) {
    const auto q = sample_initial(rng, single);
    CHECK(q.labels == std::vector<int>{0, 0});
  }
  const auto p = two_by_two(4);
  std::vector<int> counts(4, 0);
  std::vector<double> thetas;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const auto q = sample_initial(rng, p);
    ++counts[static_cast<std::size_t>(q.labels[0])];
    thetas.push_back(q.angles[1]);
    for (const double a : q.angles) {
      CHECK_MESSAGE((a > -kPi && a <= kPi), a);
    }
  }
  for (const int c : counts) {
    CHECK(std::abs(static_cast<double>(c) / kDraws - 0.25) <= 0.01);
  }
  CHECK(sspf::testing::ks_uniform(thetas, -kPi, kPi) < sspf::testing::ks_critical_001(thetas.size()));
}

TEST_CASE("sample_transition") {
  Rng rng(2);
  auto p = two_by_two(3);
  p.transitions = {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  const Particle prev{{0, 2}, {0.1, -0.2, 3.0}};
  const auto forced = sample_transition(rng, view_of(prev), p, true);
  CHECK(forced.labels == std::vector<int>{1, 0});
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_transition(rng, view_of(prev), p, false).labels == prev.labels);
  }
  p.transitions = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_transition(rng, view_of(prev), p, true).labels == prev.labels);
  }
  p.sigma_move = 1e4;
  int close = 0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const auto next = sample_transition(rng, view_of(prev), p, true);
    bool all_close = true;
    for (std::size_t m = 0; m < prev.angles.size(); ++m) {
      all_close = all_close && std::abs(wrap_angle(next.angles[m] - prev.angles[m])) <= 0.05;
    }
    close += all_close ? 1 : 0;
  }
  CHECK(static_cast<double>(close) / kDraws > 0.99);
}

TEST_CASE("update_weights") {
  const std::vector<double> prev{0.1, 0.2, 0.3, 0.4};
  const auto same = update_weights(prev, std::vector<double>{-3.0, -3.0, -3.0, -3.0});
  for (std::size_t r = 0; r < prev.size(); ++r) {
    CHECK(same.weights[r] == doctest::Approx(prev[r]).epsilon(1e-14));
  }
  CHECK(same.log_normalizer == doctest::Approx(-3.0));
  const auto dominant = update_weights(prev, std::vector<double>{0.0, 1000.0, 0.0, 0.0});
  CHECK(dominant.weights[1] >= 1.0 - 1e-12);

  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 300.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = sspf::testing::random_simplex(gen, 50);
    std::vector<double> e(50);
    for (auto& x : e) {
      x = n(gen);
    }
    const auto u = update_weights(w, e);
    double s = 0.0;
    for (const double x : u.weights) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  const double ninf = -std::numeric_limits<double>::infinity();
  try {
    update_weights(prev, std::vector<double>{ninf, ninf, ninf, ninf}, 17);
    FAIL("expected a model error");
  } catch (const ModelError& e) {
    CHECK(e.frame() == 17);
  }
}

TEST_CASE("effective_sample_size") {
  CHECK(effective_sample_size(std::vector<double>(100, 0.01)) == 100.0);
  for (const std::size_t r : {3UL, 7UL, 1000UL, 20000UL}) {
    CHECK(effective_sample_size(std::vector<double>(r, 1.0 / static_cast<double>(r))) == static_cast<double>(r));
  }
  CHECK(effective_sample_size(std::vector<double>{0.0, 1.0, 0.0}) == 1.0);
  CHECK(effective_sample_size(std::vector<double>{0.5, 0.5, 0.0, 0.0}) == 2.0);
}

TEST_CASE("systematic_resample") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = systematic_resample(rng, std::vector<double>{0.0, 0.0, 0.0, 1.0, 0.0});
    CHECK(a == std::vector<std::uint32_t>(5, 3));
    const auto b = systematic_resample(rng, std::vector<double>(4, 0.25));
    CHECK(b == std::vector<std::uint32_t>{0, 1, 2, 3});
  }
  std::mt19937_64 gen(10);
  const auto w = sspf::testing::random_simplex(gen, 8);
  std::vector<double> counts(8, 0.0);
  std::vector<double> sq(8, 0.0);
  constexpr int kTrials = 10000;
  for (int trial = 0; trial < kTrials; ++trial) {
    Rng r = Rng::stream(77, static_cast<std::uint64_t>(trial));
    const auto anc = systematic_resample(r, w);
    CHECK(std::is_sorted(anc.begin(), anc.end()));
    std::vector<double> c(8, 0.0);
    for (const auto i : anc) {
      c[i] += 1.0;
    }
    for (std::size_t i = 0; i < 8; ++i) {
      counts[i] += c[i];
      sq[i] += c[i] * c[i];
      // systematic resampling keeps every count within one of R * w
      CHECK(std::abs(c[i] - 8.0 * w[i]) < 1.0 + 1e-12);
    }
  }
  for (std::size_t i = 0; i < 8; ++i) {
    const double mean = counts[i] / kTrials;
    const double var = sq[i] / kTrials - mean * mean;
    const double se = std::sqrt(std::max(var, 1e-300) / kTrials);
    CHECK(std::abs(mean - 8.0 * w[i]) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("forward_pass basics") {
  const auto sim = simulate_meeting(sspf::testing::small_config(4, 30));
  const auto emis = EmissionConfig::from_params(sim.params, LocationFeature::kSsl);
  FilterConfig cfg;
  cfg.num_particles = 500;
  cfg.seed = 11;
  const auto a = forward_pass(sim.observations, sim.words, sim.params, emis, cfg);
  const auto b = forward_pass(sim.observations, sim.words, sim.params, emis, cfg);
  CHECK(same_ensembles(a, b));
  REQUIRE(a.size() == 30);
  CHECK(a.front().ancestors.empty());
  bool any_resampled = false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const auto& e = a[t];
    CHECK(e.t == t);
    CHECK(e.size() == 500);
    double s = 0.0;
    for (const double w : e.weights) {
      CHECK(w >= 0.0);
      s += w;
    }
    CHECK(std::abs(s - 1.0) <= 1e-9);
    CHECK(e.resampled == (effective_sample_size(e.weights) < 250.0));
    any_resampled = any_resampled || e.resampled;
    if (t > 0) {
      CHECK(e.ancestors.size() == 500);
      if (a[t - 1].resampled) {
        CHECK(std::is_sorted(e.ancestors.begin(), e.ancestors.end()));
      } else {
        for (std::size_t r = 0; r < 500; ++r) {
          CHECK(e.ancestors[r] == r);
        }
      }
    }
  }
  CHECK(any_resampled);
  cfg.seed = 12;
  CHECK_FALSE(same_ensembles(a, forward_pass(sim.observations, sim.words, sim.params, emis, cfg)));
}

TEST_CASE("forward_pass is independent of the thread count") {
  const auto sim = simulate_meeting(sspf::testing::small_config(5, 20));
  const auto emis = EmissionConfig::from_params(sim.params, LocationFeature::kDoa);
  FilterConfig cfg;
  cfg.num_particles = 2000;
  cfg.seed = 3;
  set_thread_count(1);
  const auto one = forward_pass(sim.observations, sim.words, sim.params, emis, cfg);
  set_thread_count(4);
  const auto four = forward_pass(sim.observations, sim.words, sim.params, emis, cfg);
  set_thread_count(0);
  CHECK(same_ensembles(one, four));
}

TEST_CASE("single speaker gives a certain posterior") {
  auto sc = sspf::testing::small_config(6, 20);
  sc.num_speakers = 1;
  const auto sim = simulate_meeting(sc);
  FilterConfig cfg;
  cfg.num_particles = 100;
  const auto ens = forward_pass(sim.observations, sim.words, sim.params,
                                EmissionConfig::from_params(sim.params, LocationFeature::kSsl), cfg);
  const auto table = filtered_posteriors(ens);
  for (std::size_t t = 0; t < table.frames(); ++t) {
    CHECK(table.at(t, 0)[0] == 1.0);
  }
}

TEST_CASE("restricted switching only changes labels at word starts") {
  auto sc = sspf::testing::small_config(7, 60);
  sc.num_speakers = 3;
  sc.num_channels = 2;
  const auto sim = simulate_meeting(sc);
  FilterConfig cfg;
  cfg.num_particles = 300;
  cfg.restrict_switch_to_word_boundaries = true;
  const auto ens = forward_pass(sim.observations, sim.words, sim.params,
                                EmissionConfig::from_params(sim.params, LocationFeature::kSsl), cfg);
  const auto mask = word_boundary_mask(sim.words, 60);
  for (std::size_t t = 1; t < ens.size(); ++t) {
    CHECK(ens[t].allow_switch == static_cast<bool>(mask[t]));
    if (!mask[t]) {
      for (std::size_t r = 0; r < ens[t].size(); ++r) {
        const auto parent = ens[t].ancestors[r];
        for (int n = 0; n < 2; ++n) {
          CHECK(ens[t].particle(r).labels[n] == ens[t - 1].particle(parent).labels[n]);
        }
      }
    }
  }
}

TEST_CASE("speaker posteriors ignore rotated location evidence when the feature is off") {
  const auto sim = simulate_meeting(sspf::testing::small_config(8, 25));
  auto rotated = sim.observations;
  const int bins = sim.params.bins.size();
  for (auto& f : rotated) {
    for (auto& c : f.channels) {
      SslVector shifted(c.ssl->size());
      for (int i = 0; i < bins; ++i) {
        shifted[static_cast<std::size_t>((i + 7) % bins)] = (*c.ssl)[static_cast<std::size_t>(i)];
      }
      c.ssl = shifted;
      c.doa = wrap_angle(*c.doa + 7 * sim.params.bins.width());
    }
  }
  FilterConfig cfg;
  cfg.num_particles = 400;
  auto params = sim.params;
  params.kappa = 0.0;
  for (const auto feat : {LocationFeature::kNone, LocationFeature::kSsl}) {
    const auto emis = EmissionConfig::from_params(params, feat);
    const auto a = filtered_posteriors(forward_pass(sim.observations, sim.words, params, emis, cfg));
    const auto b = filtered_posteriors(forward_pass(rotated, sim.words, params, emis, cfg));
    CHECK(sspf::testing::mean_abs_diff(a, b) == 0.0);
  }
}

TEST_CASE("both resampling extremes approach the oracle as particles grow") {
  const auto sim = simulate_meeting(sspf::testing::small_config(9, 30));
  const auto emis = EmissionConfig::from_params(sim.params, LocationFeature::kSsl);
  const auto oracle = grid_hmm_posterior(sim.observations, sim.words, sim.params, emis, 36);
  for (const double fraction : {0.0, 1.0}) {
    std::vector<double> errors;
    for (const std::size_t r : {1000UL, 10000UL, 100000UL}) {
      double err = 0.0;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        FilterConfig cfg;
        cfg.num_particles = r;
        cfg.ess_threshold_fraction = fraction;
        cfg.seed = seed;
        PosteriorTable table(sim.observations.size(), 1, 2);
        run_forward(sim.observations, sim.words, sim.params, emis, cfg,
                    [&](const ParticleEnsemble& e) { record_posteriors(e, table); });
        err += sspf::testing::mean_abs_diff(table, oracle.filtered);
      }
      errors.push_back(err / 10.0);
    }
    MESSAGE("threshold " << fraction << ": " << errors[0] << " " << errors[1] << " " << errors[2]);
    CHECK(errors[1] < errors[0]);
    CHECK(errors[2] < errors[1]);
  }
}
