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

#include "sspf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sspf/errors.hpp"

namespace sspf {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) {
    return 0.0;
  }
  return dot(a, b) / (na * nb);
}

std::vector<double> normalized(std::vector<double> v) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > 1e-12)) {
    throw ValidationError("cannot normalize a zero vector");
  }
  for (auto& x : v) {
    x /= n;
  }
  return v;
}

}  // namespace

Clustering ahc_cluster(std::span<const Segment> segments, double threshold) {
  if (segments.empty()) {
    throw ValidationError("clustering needs at least one segment");
  }
  const std::size_t dim = segments.front().embedding.size();
  struct Cluster {
    std::vector<double> sum;
    std::vector<std::size_t> members;
  };
  // kept ordered by lowest member index, so scanning pairs in order breaks ties lexicographically
  std::vector<Cluster> clusters;
  clusters.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].embedding.size() != dim) {
      throw ValidationError("segment " + std::to_string(i) + " has a different embedding dimension");
    }
    clusters.push_back({normalized(segments[i].embedding), {i}});
  }

  const auto n0 = clusters.size();
  std::vector<std::vector<double>> sim(n0, std::vector<double>(n0, 0.0));
  for (std::size_t a = 0; a < n0; ++a) {
    for (std::size_t b = a + 1; b < n0; ++b) {
      sim[a][b] = cosine(clusters[a].sum, clusters[b].sum);
    }
  }
  std::vector<std::size_t> active(n0);
  for (std::size_t i = 0; i < n0; ++i) {
    active[i] = i;
  }

  while (active.size() > 1) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t ba = 0;
    std::size_t bb = 0;
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const double s = sim[active[x]][active[y]];
        if (s > best) {
          best = s;
          ba = x;
          bb = y;
        }
      }
    }
    if (best < threshold) {
      break;
    }
    const std::size_t keep = active[ba];
    const std::size_t drop = active[bb];
    auto& target = clusters[keep];
    for (std::size_t d = 0; d < dim; ++d) {
      target.sum[d] += clusters[drop].sum[d];
    }
    target.members.insert(target.members.end(), clusters[drop].members.begin(), clusters[drop].members.end());
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
    for (const auto other : active) {
      if (other == keep) {
        continue;
      }
      const double s = cosine(target.sum, clusters[other].sum);
      sim[std::min(keep, other)][std::max(keep, other)] = s;
    }
  }

  Clustering out;
  out.labels.assign(segments.size(), -1);
  out.num_clusters = static_cast<int>(active.size());
  // active is ordered by lowest member, which is first-appearance order
  for (std::size_t k = 0; k < active.size(); ++k) {
    for (const auto member : clusters[active[k]].members) {
      out.labels[member] = static_cast<int>(k);
    }
  }
  return out;
}

std::vector<std::vector<double>> estimate_centroids(std::span<const Segment> segments, const Clustering& clustering) {
  if (clustering.labels.size() != segments.size()) {
    throw ValidationError("clustering does not cover the segments");
  }
  if (segments.empty()) {
    return {};
  }
  const std::size_t dim = segments.front().embedding.size();
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(clustering.num_clusters),
                                        std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(sums.size(), 0);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const int k = clustering.labels[i];
    if (k < 0 || k >= clustering.num_clusters) {
      throw ValidationError("cluster label out of range");
    }
    const auto ku = static_cast<std::size_t>(k);
    for (std::size_t d = 0; d < dim; ++d) {
      sums[ku][d] += segments[i].embedding[d];
    }
    ++counts[ku];
  }
  for (std::size_t k = 0; k < sums.size(); ++k) {
    if (counts[k] == 0) {
      throw ValidationError("cluster " + std::to_string(k) + " is empty");
    }
    const double n = std::sqrt(dot(sums[k], sums[k]));
    if (!(n > 1e-9 * static_cast<double>(counts[k]))) {
      throw ValidationError("cluster " + std::to_string(k) + " has a zero resultant embedding");
    }
    for (auto& x : sums[k]) {
      x /= n;
    }
  }
  return sums;
}

std::vector<std::vector<double>> estimate_transitions(std::span<const std::vector<int>> sequences, int num_speakers,
                                                      double alpha) {
  if (num_speakers < 1) {
    throw ValidationError("speaker count must be at least 1");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("smoothing weight must lie in [0, 1]");
  }
  const auto m = static_cast<std::size_t>(num_speakers);
  std::vector<std::vector<double>> counts(m, std::vector<double>(m, 0.0));
  for (const auto& seq : sequences) {
    for (const int q : seq) {
      if (q < 0 || q >= num_speakers) {
        throw ValidationError("label " + std::to_string(q) + " out of range");
      }
    }
    for (std::size_t t = 1; t < seq.size(); ++t) {
      counts[static_cast<std::size_t>(seq[t - 1])][static_cast<std::size_t>(seq[t])] += 1.0;
    }
  }
  const double uniform = 1.0 / static_cast<double>(m);
  std::vector<std::vector<double>> a(m, std::vector<double>(m, uniform));
  for (std::size_t i = 0; i < m; ++i) {
    double total = 0.0;
    for (const double c : counts[i]) {
      total += c;
    }
    if (total == 0.0) {
      continue;
    }
    double row_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      a[i][j] = (1.0 - alpha) * counts[i][j] / total + alpha * uniform;
      row_sum += a[i][j];
    }
    for (auto& v : a[i]) {
      v /= row_sum;
    }
  }
  return a;
}

Assignment hungarian_map(const std::vector<std::vector<double>>& cost) {
  Assignment out;
  const std::size_t rows = cost.size();
  out.row_to_col.assign(rows, std::nullopt);
  if (rows == 0) {
    return out;
  }
  const std::size_t cols = cost.front().size();
  for (const auto& row : cost) {
    if (row.size() != cols) {
      throw ValidationError("cost matrix is ragged");
    }
    for (const double c : row) {
      if (!std::isfinite(c)) {
        throw ValidationError("cost matrix has a non-finite entry");
      }
    }
  }
  if (cols == 0) {
    return out;
  }
  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;
  const std::size_t m = transposed ? rows : cols;
  const auto at = [&](std::size_t i, std::size_t j) { return transposed ? cost[j - 1][i - 1] : cost[i - 1][j - 1]; };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = at(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) {
      continue;
    }
    const std::size_t small = p[j] - 1;
    const std::size_t large = j - 1;
    const std::size_t row = transposed ? large : small;
    const std::size_t col = transposed ? small : large;
    out.row_to_col[row] = static_cast<int>(col);
    out.cost += cost[row][col];
  }
  return out;
}

namespace {

struct MappedErrors {
  std::size_t errors{0};
  std::size_t total{0};
  std::vector<std::optional<int>> mapping;
};

MappedErrors mapped_errors(const std::vector<std::vector<std::size_t>>& confusion) {
  MappedErrors out;
  std::vector<std::vector<double>> cost(confusion.size());
  for (std::size_t h = 0; h < confusion.size(); ++h) {
    cost[h].resize(confusion[h].size());
    for (std::size_t r = 0; r < confusion[h].size(); ++r) {
      cost[h][r] = -static_cast<double>(confusion[h][r]);
      out.total += confusion[h][r];
    }
  }
  const auto assignment = hungarian_map(cost);
  std::size_t matched = 0;
  for (std::size_t h = 0; h < confusion.size(); ++h) {
    if (assignment.row_to_col[h]) {
      matched += confusion[h][static_cast<std::size_t>(*assignment.row_to_col[h])];
    }
  }
  out.errors = out.total - matched;
  out.mapping = assignment.row_to_col;
  return out;
}

}  // namespace

DiarisationMetrics diarisation_metrics(std::span<const int> hyp, std::span<const int> ref,
                                       std::span<const WordSegment> words) {
  if (hyp.size() != ref.size() || hyp.size() != words.size()) {
    throw ValidationError("hypothesis, reference and word inventories differ in size");
  }
  DiarisationMetrics out;
  out.num_words = words.size();
  if (words.empty()) {
    return out;
  }
  int hyp_max = 0;
  int ref_max = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (hyp[i] < 0 || ref[i] < 0) {
      throw ValidationError("speaker labels must be nonnegative");
    }
    hyp_max = std::max(hyp_max, hyp[i]);
    ref_max = std::max(ref_max, ref[i]);
  }
  const auto kh = static_cast<std::size_t>(hyp_max) + 1;
  const auto kr = static_cast<std::size_t>(ref_max) + 1;
  out.confusion.assign(kh, std::vector<std::size_t>(kr, 0));
  std::vector<std::vector<std::size_t>> frame_confusion(kh, std::vector<std::size_t>(kr, 0));
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto h = static_cast<std::size_t>(hyp[i]);
    const auto r = static_cast<std::size_t>(ref[i]);
    ++out.confusion[h][r];
    frame_confusion[h][r] += words[i].end - words[i].start + 1;
  }
  const auto word_result = mapped_errors(out.confusion);
  const auto frame_result = mapped_errors(frame_confusion);
  out.mapping = word_result.mapping;
  out.num_frames = frame_result.total;
  out.word_error_rate = static_cast<double>(word_result.errors) / static_cast<double>(word_result.total);
  out.frame_error_rate = static_cast<double>(frame_result.errors) / static_cast<double>(frame_result.total);
  return out;
}

std::vector<Segment> segments_from_words(std::span<const ObservationFrame> observations,
                                         std::span<const WordSegment> words) {
  std::vector<Segment> segments;
  segments.reserve(words.size());
  for (const auto& w : words) {
    Segment s;
    s.channel = w.channel;
    s.start = w.start;
    s.end = w.end;
    for (std::size_t t = w.start; t <= w.end && t < observations.size(); ++t) {
      const auto* c = observations[t].find(w.channel);
      if (c == nullptr) {
        continue;
      }
      if (s.embedding.empty()) {
        s.embedding.assign(c->dvec.size(), 0.0);
      }
      for (std::size_t d = 0; d < c->dvec.size(); ++d) {
        s.embedding[d] += c->dvec[d];
      }
    }
    if (s.embedding.empty()) {
      throw ValidationError("word " + std::to_string(w.id) + " has no d-vector observations");
    }
    try {
      s.embedding = normalized(std::move(s.embedding));
    } catch (const ValidationError&) {
      throw ValidationError("word " + std::to_string(w.id) + " has a zero mean embedding");
    }
    segments.push_back(std::move(s));
  }
  return segments;
}

InitResult initialize_params(std::span<const ObservationFrame> observations, std::span<const WordSegment> words,
                             int num_channels, const InitConfig& config) {
  if (num_channels < 1) {
    throw ValidationError("channel count must be at least 1");
  }
  validate_words(words, observations.size(), num_channels);
  const auto segments = segments_from_words(observations, words);
  InitResult out;
  out.clustering = ahc_cluster(segments, config.ahc_threshold);
  const int m = out.clustering.num_clusters;

  // frame labels per channel; runs of consecutive labeled frames become sequences
  std::vector<std::vector<int>> frame_labels(static_cast<std::size_t>(num_channels),
                                             std::vector<int>(observations.size(), -1));
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t t = words[i].start; t <= words[i].end; ++t) {
      frame_labels[static_cast<std::size_t>(words[i].channel)][t] = out.clustering.labels[i];
    }
  }
  std::vector<std::vector<int>> sequences;
  for (const auto& channel : frame_labels) {
    std::vector<int> run;
    for (const int q : channel) {
      if (q < 0) {
        if (run.size() > 1) {
          sequences.push_back(run);
        }
        run.clear();
      } else {
        run.push_back(q);
      }
    }
    if (run.size() > 1) {
      sequences.push_back(run);
    }
  }

  auto& p = out.params;
  p.num_speakers = m;
  p.num_channels = num_channels;
  p.centroids = estimate_centroids(segments, out.clustering);
  p.transitions = estimate_transitions(sequences, m, config.alpha);
  p.gamma = config.gamma;
  p.sigma_move = config.sigma_move;
  p.kappa = config.kappa;
  p.bins = BinGeometry(config.num_bins);
  return out;
}

}  // namespace sspf
