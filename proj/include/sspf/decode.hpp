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

#ifndef SSPF_DECODE_HPP_
#define SSPF_DECODE_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sspf/circstats.hpp"
#include "sspf/filter.hpp"
#include "sspf/model.hpp"
#include "sspf/smoother.hpp"

namespace sspf {

enum class Aggregation { kSum, kProduct, kMajority };

Aggregation parse_aggregation(std::string_view name);
std::string_view to_string(Aggregation method);

/// Per-frame, per-channel speaker posteriors, T x N x M.
class PosteriorTable {
 public:
  PosteriorTable() = default;
  PosteriorTable(std::size_t frames, int channels, int speakers);

  [[nodiscard]] std::size_t frames() const noexcept { return frames_; }
  [[nodiscard]] int channels() const noexcept { return channels_; }
  [[nodiscard]] int speakers() const noexcept { return speakers_; }

  [[nodiscard]] std::span<const double> at(std::size_t t, int channel) const;
  [[nodiscard]] std::span<double> at(std::size_t t, int channel);

 private:
  std::size_t frames_{0};
  int channels_{0};
  int speakers_{0};
  std::vector<double> data_;
};

/// p(q_n = m) as the total weight of particles whose channel-n label is m.
std::vector<double> frame_speaker_posterior(const ParticleEnsemble& ensemble, int channel);

/// Same marginal under backward weights.
std::vector<double> frame_speaker_posterior(const ParticleEnsemble& forward, const SmoothedEnsemble& smoothed,
                                            int channel);

PosteriorTable filtered_posteriors(std::span<const ParticleEnsemble> ensembles);

PosteriorTable smoothed_posteriors(std::span<const ParticleEnsemble> ensembles,
                                   std::span<const SmoothedEnsemble> smoothed);

/// Writes every channel's filtered posterior of one ensemble into row t of the table.
void record_posteriors(const ParticleEnsemble& ensemble, PosteriorTable& table);

/// Speaker label of one word from its frame posteriors. Ties go to the lowest speaker index.
int aggregate_word(std::span<const std::vector<double>> frames, Aggregation method);

/// One label per word, in input order.
std::vector<int> decode_words(const PosteriorTable& posteriors, std::span<const WordSegment> words,
                              Aggregation method);

struct TraceEntry {
  std::size_t t{0};
  int speaker{0};
  double mean{0.0};
  double resultant{0.0};
};

/// Weighted circular mean and resultant of each speaker's angle in one ensemble.
std::vector<CircularSummary> location_summary(const ParticleEnsemble& ensemble);

std::vector<TraceEntry> location_trace(std::span<const ParticleEnsemble> ensembles);

}  // namespace sspf

#endif  // SSPF_DECODE_HPP_
