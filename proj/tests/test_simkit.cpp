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
#include <set>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "sspf/circstats.hpp"
#include "sspf/errors.hpp"
#include "sspf/model.hpp"
#include "sspf/simkit.hpp"

using namespace sspf;

namespace {

bool same_meeting(const SimulatedMeeting& a, const SimulatedMeeting& b) {
  if (a.observations.size() != b.observations.size() || a.truth.locations != b.truth.locations ||
      a.truth.active != b.truth.active || a.truth.word_speakers != b.truth.word_speakers ||
      a.params.centroids != b.params.centroids || a.params.transitions != b.params.transitions) {
    return false;
  }
  for (std::size_t t = 0; t < a.observations.size(); ++t) {
    const auto& x = a.observations[t].channels;
    const auto& y = b.observations[t].channels;
    if (x.size() != y.size()) {
      return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].channel != y[i].channel || x[i].dvec != y[i].dvec || x[i].ssl != y[i].ssl || x[i].doa != y[i].doa) {
        return false;
      }
    }
  }
  return a.words.size() == b.words.size();
}

double angular_range(const GroundTruth& truth, int m, std::size_t frames) {
  // range of the unwrapped trajectory
  double pos = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t t = 1; t < frames; ++t) {
    pos += wrap_angle(truth.location(t, m) - truth.location(t - 1, m));
    lo = std::min(lo, pos);
    hi = std::max(hi, pos);
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("simulate_meeting is reproducible") {
  SimConfig cfg;
  cfg.num_frames = 200;
  cfg.seed = 3;
  const auto a = simulate_meeting(cfg);
  const auto b = simulate_meeting(cfg);
  CHECK(same_meeting(a, b));
  cfg.seed = 4;
  CHECK_FALSE(same_meeting(a, simulate_meeting(cfg)));
}

TEST_CASE("simulated meetings satisfy every model invariant") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SimConfig cfg;
    cfg.num_frames = 300;
    cfg.num_channels = 3;
    cfg.seed = seed;
    auto sim = simulate_meeting(cfg);
    CHECK(validate_params(sim.params).empty());
    CHECK_NOTHROW(validate_words(sim.words, 300, 3));
    CHECK(sim.truth.word_speakers.size() == sim.words.size());
    for (auto& f : sim.observations) {
      CHECK_NOTHROW(validate_frame(f, sim.params));
      for (const auto& c : f.channels) {
        CHECK(*c.doa == ssl_mode_doa(*c.ssl, sim.params.bins));
        CHECK(sim.truth.speaker(f.t, c.channel) >= 0);
      }
    }
    for (std::size_t t = 0; t < 300; ++t) {
      std::set<int> seen;
      int active = 0;
      for (int n = 0; n < 3; ++n) {
        const int q = sim.truth.speaker(t, n);
        CHECK((q >= -1 && q < 4));
        CHECK((q >= 0) == (sim.observations[t].find(n) != nullptr));
        if (q >= 0) {
          seen.insert(q);
          ++active;
        }
      }
      CHECK(static_cast<int>(seen.size()) == active);
      for (int m = 0; m < 4; ++m) {
        CHECK(sim.truth.location(t, m) > -kPi);
        CHECK(sim.truth.location(t, m) <= kPi);
      }
    }
    for (std::size_t w = 0; w < sim.words.size(); ++w) {
      const auto& word = sim.words[w];
      CHECK(word.end - word.start + 1 >= cfg.word_min_frames);
      CHECK(word.end - word.start + 1 <= cfg.word_max_frames);
      for (std::size_t t = word.start; t <= word.end; ++t) {
        CHECK(sim.truth.speaker(t, word.channel) == sim.truth.word_speakers[w]);
      }
    }
  }
}

TEST_CASE("a very concentrated random walk keeps speakers stationary") {
  SimConfig cfg;
  cfg.num_frames = 1000;
  cfg.sigma_move = 1e6;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto sim = simulate_meeting(cfg);
    for (int m = 0; m < cfg.num_speakers; ++m) {
      CHECK(angular_range(sim.truth, m, 1000) < 0.1);
    }
    CHECK_FALSE(meeting_has_movement(sim.truth, default_movement_min_frames(1000)));
  }
}

TEST_CASE("forced silence silences the speaker") {
  SimConfig cfg;
  cfg.num_frames = 400;
  cfg.forced_silence = ForcedSilence{2, 100, 150};
  const auto sim = simulate_meeting(cfg);
  for (std::size_t t = 100; t < 250; ++t) {
    for (int n = 0; n < cfg.num_channels; ++n) {
      CHECK(sim.truth.speaker(t, n) != 2);
    }
  }
  cfg.forced_silence = ForcedSilence{7, 0, 10};
  CHECK_THROWS_AS(simulate_meeting(cfg), ValidationError);
}

TEST_CASE("simulation config validation") {
  SimConfig cfg;
  cfg.turn_persistence = 1.5;
  CHECK_THROWS_AS(validate_sim_config(cfg), ValidationError);
  cfg = SimConfig{};
  cfg.num_speakers = 0;
  CHECK_THROWS_AS(validate_sim_config(cfg), ValidationError);
  cfg = SimConfig{};
  cfg.word_min_frames = 3;
  cfg.word_max_frames = 2;
  CHECK_THROWS_AS(validate_sim_config(cfg), ValidationError);
  cfg = SimConfig{};
  cfg.sigma_move = -1.0;
  CHECK_THROWS_AS(validate_sim_config(cfg), ValidationError);
  CHECK_NOTHROW(validate_sim_config(SimConfig{}));
}

TEST_CASE("vmf_sample") {
  Rng rng(8);
  std::vector<double> mean(10, 0.0);
  mean[3] = 1.0;
  double mean_cos = 0.0;
  constexpr int kDraws = 20000;
  for (int i = 0; i < kDraws; ++i) {
    const auto v = vmf_sample(rng, mean, 15.0);
    double n = 0.0;
    for (const double x : v) {
      n += x * x;
    }
    CHECK(std::abs(n - 1.0) < 1e-12);
    mean_cos += v[3];
  }
  mean_cos /= kDraws;
  // E[mu . x] = I_{p/2}(k) / I_{p/2-1}(k) for p = 10, k = 15: the ratio of
  // Bessel functions of orders 5 and 4, 0.73682 to five digits
  CHECK(std::abs(mean_cos - 0.73682) < 0.005);
  Rng a(1);
  Rng b(1);
  CHECK(vmf_sample(a, mean, 3.0) == vmf_sample(b, mean, 3.0));
}

TEST_CASE("speaker movement classification") {
  GroundTruth truth;
  truth.num_speakers = 1;
  truth.num_channels = 1;
  for (int t = 0; t < 40; ++t) {
    truth.locations.push_back(t < 20 ? 0.1 : 0.1 + kPi / 2.0);
    truth.active.push_back(0);
  }
  CHECK(speaker_moves(truth, 0, 20, kPi / 6.0));
  CHECK_FALSE(speaker_moves(truth, 0, 21, kPi / 6.0));
  CHECK_FALSE(speaker_moves(truth, 0, 20, 2.0));
  for (int t = 20; t < 40; ++t) {
    truth.locations[static_cast<std::size_t>(t)] = 0.1 + kPi / 12.0;
  }
  CHECK_FALSE(speaker_moves(truth, 0, 1, kPi / 6.0));
  CHECK(default_movement_min_frames(9000) == 75);
  CHECK(default_movement_min_frames(1500) == 13);
  CHECK(default_movement_min_frames(1) == 1);
}

TEST_CASE("grid oracle with one bin is a plain discrete HMM") {
  ModelParams p;
  p.num_speakers = 2;
  p.num_channels = 1;
  p.centroids = {{1.0, 0.0}, {0.0, 1.0}};
  p.transitions = {{0.7, 0.3}, {0.4, 0.6}};
  p.gamma = 1.5;
  p.sigma_move = 10.0;
  p.kappa = 0.0;
  p.bins = BinGeometry(36);
  std::vector<ObservationFrame> obs(3);
  const double r = std::sqrt(0.5);
  obs[0].t = 0;
  obs[0].channels.push_back({0, {1.0, 0.0}, std::nullopt, std::nullopt});
  obs[1].t = 1;
  obs[2].t = 2;
  obs[2].channels.push_back({0, {-r, r}, std::nullopt, std::nullopt});
  const auto got = grid_hmm_posterior(obs, {}, p, EmissionConfig::from_params(p, LocationFeature::kNone), 1);

  // enumerate the 8 label paths
  const auto emis = [&](std::size_t t, int q) {
    if (obs[t].channels.empty()) {
      return 1.0;
    }
    const auto& d = obs[t].channels[0].dvec;
    const auto& mu = p.centroids[static_cast<std::size_t>(q)];
    return std::exp(p.gamma * (d[0] * mu[0] + d[1] * mu[1]));
  };
  double filt[3][2] = {};
  double smooth[3][2] = {};
  for (std::size_t upto = 1; upto <= 3; ++upto) {
    double z = 0.0;
    double mass[2] = {0.0, 0.0};
    for (int path = 0; path < (1 << upto); ++path) {
      double pr = 0.5;
      int prev = -1;
      for (std::size_t t = 0; t < upto; ++t) {
        const int q = (path >> t) & 1;
        if (prev >= 0) {
          pr *= p.transitions[static_cast<std::size_t>(prev)][static_cast<std::size_t>(q)];
        }
        pr *= emis(t, q);
        prev = q;
      }
      z += pr;
      mass[(path >> (upto - 1)) & 1] += pr;
      if (upto == 3) {
        for (std::size_t t = 0; t < 3; ++t) {
          smooth[t][(path >> t) & 1] += pr;
        }
      }
    }
    filt[upto - 1][0] = mass[0] / z;
    filt[upto - 1][1] = mass[1] / z;
    if (upto == 3) {
      for (auto& row : smooth) {
        row[0] /= z;
        row[1] /= z;
      }
    }
  }
  for (std::size_t t = 0; t < 3; ++t) {
    for (int m = 0; m < 2; ++m) {
      CHECK(got.filtered.at(t, 0)[m] == doctest::Approx(filt[t][m]).epsilon(1e-12));
      CHECK(got.smoothed.at(t, 0)[m] == doctest::Approx(smooth[t][m]).epsilon(1e-12));
    }
  }
  // frozen reference for the first frame: 1 / (1 + e^-1.5)
  CHECK(got.filtered.at(0, 0)[0] == doctest::Approx(0.8175744761936437).epsilon(1e-12));
}

TEST_CASE("grid oracle invariants") {
  const auto sim = simulate_meeting(sspf::testing::small_config(2, 30));
  const auto emis = EmissionConfig::from_params(sim.params, LocationFeature::kSsl);
  const auto o = grid_hmm_posterior(sim.observations, sim.words, sim.params, emis, 36);
  for (std::size_t t = 0; t < 30; ++t) {
    for (const auto* table : {&o.filtered, &o.smoothed}) {
      const auto p = table->at(t, 0);
      CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-12);
    }
  }
  CHECK(o.smoothed.at(29, 0)[0] == doctest::Approx(o.filtered.at(29, 0)[0]).epsilon(1e-12));

  std::vector<ObservationFrame> silent(3);
  for (std::size_t t = 0; t < 3; ++t) {
    silent[t].t = t;
  }
  const auto u = grid_hmm_posterior(silent, {}, sim.params, emis, 36);
  CHECK(u.filtered.at(0, 0)[0] == doctest::Approx(0.5).epsilon(1e-12));

  auto big = sim.params;
  big.num_speakers = 3;
  big.centroids.push_back(big.centroids[0]);
  big.transitions = {{0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}};
  CHECK_THROWS_AS(grid_hmm_posterior(silent, {}, big, emis, 36), ValidationError);
}
