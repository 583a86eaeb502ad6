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

#ifndef SSPF_SMOOTHER_HPP_
#define SSPF_SMOOTHER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sspf/filter.hpp"
#include "sspf/model.hpp"
#include "sspf/rng.hpp"

namespace sspf {

/// Backward importance weights over a (possibly sub-sampled) forward ensemble.
struct SmoothedEnsemble {
  std::size_t t{0};
  /// Indices into the full forward ensemble of frame t.
  std::vector<std::uint32_t> indices;
  std::vector<double> backward_weights;
};

/// k particles drawn uniformly without replacement, forward weights renormalized.
/// `chosen`, if given, receives the source indices (ascending).
ParticleEnsemble subsample(const ParticleEnsemble& ensemble, std::size_t k, Rng& rng,
                           std::vector<std::uint32_t>* chosen = nullptr);

/// Forward filtering-backward smoothing with the exact O(k^2) recursion per frame.
/**
 * Each frame is independently sub-sampled to `k_backward` particles (no-op
 * when k_backward >= R), using the stream (config.seed, t, subsample). When
 * config.restrict_switch_to_word_boundaries is set, the speaker transition
 * into a frame that does not start a word is the identity.
 *
 * Throws ModelError when every backward weight of a frame vanishes.
 */
std::vector<SmoothedEnsemble> backward_pass(std::span<const ParticleEnsemble> ensembles,
                                            std::span<const WordSegment> words, const ModelParams& params,
                                            const FilterConfig& config, std::size_t k_backward);

}  // namespace sspf

#endif  // SSPF_SMOOTHER_HPP_
