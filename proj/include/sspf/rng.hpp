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

#ifndef SSPF_RNG_HPP_
#define SSPF_RNG_HPP_

#include <array>
#include <cstdint>
#include <limits>

namespace sspf {

/// xoshiro256** engine, cheap enough to construct once per particle per frame.
/**
 * Satisfies UniformRandomBitGenerator. Streams are keyed by a tuple of integers
 * (seed, frame, index, purpose) so that results never depend on the order in
 * which particles are processed.
 */
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) { reseed(seed); }

  /// Independent stream for the given key.
  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix(seed ^ 0x6a09e667f3bcc908ULL);
    h = mix(h ^ (a + 0x9e3779b97f4a7c15ULL));
    h = mix(h ^ (b + 0xbb67ae8584caa73bULL));
    h = mix(h ^ (c + 0x3c6ef372fe94f82bULL));
    return Rng{h};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1).
  double uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      s = mix(x);
    }
  }

  std::array<std::uint64_t, 4> state_{};
};

/// Purposes used as the last element of a stream key.
enum class StreamPurpose : std::uint64_t {
  kInitial = 1,
  kTransition = 2,
  kResample = 3,
  kSubsample = 4,
  kSimulation = 5,
};

inline Rng purpose_stream(std::uint64_t seed, std::uint64_t frame, std::uint64_t index, StreamPurpose purpose) {
  return Rng::stream(seed, frame, index, static_cast<std::uint64_t>(purpose));
}

}  // namespace sspf

#endif  // SSPF_RNG_HPP_
