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

#ifndef SSPF_TESTS_FIXTURES_HPP_
#define SSPF_TESTS_FIXTURES_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "sspf/decode.hpp"
#include "sspf/simkit.hpp"

namespace sspf::testing {

/// Small matched-model meeting: two speakers on one channel.
inline SimConfig small_config(std::uint64_t seed, std::size_t frames = 50) {
  SimConfig cfg;
  cfg.num_speakers = 2;
  cfg.num_channels = 1;
  cfg.num_frames = frames;
  cfg.gamma = 2.0;
  cfg.embedding_dim = 16;
  cfg.kappa = 10.0;
  cfg.sigma_move = 20.0;
  cfg.num_bins = 36;
  cfg.turn_persistence = 0.85;
  cfg.silence_probability = 0.2;
  cfg.seed = seed;
  return cfg;
}

inline double mean_abs_diff(const PosteriorTable& a, const PosteriorTable& b) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < a.frames(); ++t) {
    for (int n = 0; n < a.channels(); ++n) {
      const auto pa = a.at(t, n);
      const auto pb = b.at(t, n);
      for (std::size_t m = 0; m < pa.size(); ++m) {
        total += std::abs(pa[m] - pb[m]);
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace sspf::testing

#endif  // SSPF_TESTS_FIXTURES_HPP_
