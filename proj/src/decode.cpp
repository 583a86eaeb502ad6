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

#include "sspf/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sspf/errors.hpp"

namespace sspf {

namespace {

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) {
      best = i;
    }
  }
  return best;
}

}  // namespace

Aggregation parse_aggregation(std::string_view name) {
  if (name == "sum") {
    return Aggregation::kSum;
  }
  if (name == "product") {
    return Aggregation::kProduct;
  }
  if (name == "majority") {
    return Aggregation::kMajority;
  }
  throw ValidationError("unknown aggregation '" + std::string(name) + "' (expected sum, product or majority)");
}

std::string_view to_string(Aggregation method) {
  switch (method) {
    case Aggregation::kSum:
      return "sum";
    case Aggregation::kProduct:
      return "product";
    case Aggregation::kMajority:
      return "majority";
  }
  return "sum";
}

PosteriorTable::PosteriorTable(std::size_t frames, int channels, int speakers)
    : frames_{frames},
      channels_{channels},
      speakers_{speakers},
      data_(frames * static_cast<std::size_t>(channels) * static_cast<std::size_t>(speakers), 0.0) {}

std::span<const double> PosteriorTable::at(std::size_t t, int channel) const {
  const auto m = static_cast<std::size_t>(speakers_);
  return std::span<const double>(data_).subspan((t * static_cast<std::size_t>(channels_) +
                                                 static_cast<std::size_t>(channel)) * m, m);
}

std::span<double> PosteriorTable::at(std::size_t t, int channel) {
  const auto m = static_cast<std::size_t>(speakers_);
  return std::span<double>(data_).subspan((t * static_cast<std::size_t>(channels_) +
                                           static_cast<std::size_t>(channel)) * m, m);
}

namespace {

// Divides by the accumulated total so a single occupied speaker gets exactly 1.
void renormalize(std::vector<double>& p) {
  double total = 0.0;
  for (const double v : p) {
    total += v;
  }
  if (total > 0.0) {
    for (auto& v : p) {
      v /= total;
    }
  }
}

}  // namespace

std::vector<double> frame_speaker_posterior(const ParticleEnsemble& ensemble, int channel) {
  std::vector<double> p(static_cast<std::size_t>(ensemble.num_speakers), 0.0);
  for (std::size_t r = 0; r < ensemble.size(); ++r) {
    p[static_cast<std::size_t>(ensemble.particle(r).labels[static_cast<std::size_t>(channel)])] +=
        ensemble.weights[r];
  }
  renormalize(p);
  return p;
}

std::vector<double> frame_speaker_posterior(const ParticleEnsemble& forward, const SmoothedEnsemble& smoothed,
                                            int channel) {
  std::vector<double> p(static_cast<std::size_t>(forward.num_speakers), 0.0);
  for (std::size_t k = 0; k < smoothed.indices.size(); ++k) {
    const auto label = forward.particle(smoothed.indices[k]).labels[static_cast<std::size_t>(channel)];
    p[static_cast<std::size_t>(label)] += smoothed.backward_weights[k];
  }
  renormalize(p);
  return p;
}

void record_posteriors(const ParticleEnsemble& ensemble, PosteriorTable& table) {
  for (int n = 0; n < ensemble.num_channels; ++n) {
    const auto p = frame_speaker_posterior(ensemble, n);
    std::copy(p.begin(), p.end(), table.at(ensemble.t, n).begin());
  }
}

PosteriorTable filtered_posteriors(std::span<const ParticleEnsemble> ensembles) {
  if (ensembles.empty()) {
    return {};
  }
  PosteriorTable table(ensembles.size(), ensembles.front().num_channels, ensembles.front().num_speakers);
  for (const auto& e : ensembles) {
    record_posteriors(e, table);
  }
  return table;
}

PosteriorTable smoothed_posteriors(std::span<const ParticleEnsemble> ensembles,
                                   std::span<const SmoothedEnsemble> smoothed) {
  if (ensembles.size() != smoothed.size()) {
    throw ValidationError("forward and backward frame counts differ");
  }
  if (ensembles.empty()) {
    return {};
  }
  PosteriorTable table(ensembles.size(), ensembles.front().num_channels, ensembles.front().num_speakers);
  for (std::size_t t = 0; t < ensembles.size(); ++t) {
    for (int n = 0; n < ensembles[t].num_channels; ++n) {
      const auto p = frame_speaker_posterior(ensembles[t], smoothed[t], n);
      std::copy(p.begin(), p.end(), table.at(t, n).begin());
    }
  }
  return table;
}

int aggregate_word(std::span<const std::vector<double>> frames, Aggregation method) {
  if (frames.empty()) {
    throw ValidationError("cannot aggregate an empty word");
  }
  const std::size_t m = frames.front().size();
  std::vector<double> score(m, 0.0);
  for (const auto& p : frames) {
    if (p.size() != m) {
      throw ValidationError("posterior sizes differ within a word");
    }
    switch (method) {
      case Aggregation::kSum:
        for (std::size_t i = 0; i < m; ++i) {
          score[i] += p[i];
        }
        break;
      case Aggregation::kProduct:
        for (std::size_t i = 0; i < m; ++i) {
          score[i] += p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
        }
        break;
      case Aggregation::kMajority:
        score[argmax_lowest(p)] += 1.0;
        break;
    }
  }
  return static_cast<int>(argmax_lowest(score));
}

std::vector<int> decode_words(const PosteriorTable& posteriors, std::span<const WordSegment> words,
                              Aggregation method) {
  std::vector<int> labels;
  labels.reserve(words.size());
  std::vector<std::vector<double>> frames;
  for (const auto& w : words) {
    if (w.start > w.end || w.end >= posteriors.frames() || w.channel < 0 || w.channel >= posteriors.channels()) {
      throw ValidationError("word " + std::to_string(w.id) + " lies outside the posterior table");
    }
    frames.clear();
    for (std::size_t t = w.start; t <= w.end; ++t) {
      const auto p = posteriors.at(t, w.channel);
      frames.emplace_back(p.begin(), p.end());
    }
    labels.push_back(aggregate_word(frames, method));
  }
  return labels;
}

std::vector<CircularSummary> location_summary(const ParticleEnsemble& ensemble) {
  const auto n_spk = static_cast<std::size_t>(ensemble.num_speakers);
  std::vector<CircularSummary> out(n_spk);
  for (std::size_t m = 0; m < n_spk; ++m) {
    double c = 0.0;
    double s = 0.0;
    for (std::size_t r = 0; r < ensemble.size(); ++r) {
      const double a = ensemble.angles[r * n_spk + m];
      c += ensemble.weights[r] * std::cos(a);
      s += ensemble.weights[r] * std::sin(a);
    }
    const double resultant = std::min(1.0, std::hypot(c, s));
    out[m].resultant = resultant;
    out[m].mean = resultant < 1e-12 ? 0.0 : wrap_angle(std::atan2(s, c));
  }
  return out;
}

std::vector<TraceEntry> location_trace(std::span<const ParticleEnsemble> ensembles) {
  std::vector<TraceEntry> trace;
  for (const auto& e : ensembles) {
    const auto summary = location_summary(e);
    for (std::size_t m = 0; m < summary.size(); ++m) {
      trace.push_back({e.t, static_cast<int>(m), summary[m].mean, summary[m].resultant});
    }
  }
  return trace;
}

}  // namespace sspf
