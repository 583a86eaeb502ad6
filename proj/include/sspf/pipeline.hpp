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

#ifndef SSPF_PIPELINE_HPP_
#define SSPF_PIPELINE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sspf/model.hpp"

/**
 * \file
 * \brief Model initialization from agglomerative clustering, optimal
 * cluster-to-speaker mapping and diarisation scoring.
 */

namespace sspf {

/// A speaker-pure stretch of one channel summarized by its mean embedding.
struct Segment {
  int channel{0};
  std::size_t start{0};
  std::size_t end{0};
  std::vector<double> embedding;
};

struct Clustering {
  /// Cluster id per segment, 0-based, numbered by first appearance.
  std::vector<int> labels;
  int num_clusters{0};
};

/// Greedy agglomerative clustering on the cosine similarity of cluster mean embeddings.
/**
 * Repeatedly merges the most similar pair until the best similarity drops
 * below `threshold`. Equal similarities go to the lexicographically smallest
 * pair of (lowest member segment) indices.
 */
Clustering ahc_cluster(std::span<const Segment> segments, double threshold);

/// Unit-norm mean direction per cluster. Throws ValidationError on a zero resultant.
std::vector<std::vector<double>> estimate_centroids(std::span<const Segment> segments, const Clustering& clustering);

/// Pooled bigram transition estimate interpolated with a uniform matrix.
/**
 * Each inner sequence is a run of consecutive frames on one channel. Rows
 * without counts fall back to uniform.
 */
std::vector<std::vector<double>> estimate_transitions(std::span<const std::vector<int>> sequences, int num_speakers,
                                                      double alpha);

struct Assignment {
  /// Column chosen for each row, or nullopt when the row is left unassigned (more rows than columns).
  std::vector<std::optional<int>> row_to_col;
  double cost{0.0};
};

/// Minimum-cost one-to-one assignment on a rectangular cost matrix (Kuhn-Munkres with potentials).
Assignment hungarian_map(const std::vector<std::vector<double>>& cost);

struct DiarisationMetrics {
  double word_error_rate{0.0};
  double frame_error_rate{0.0};
  /// confusion[h][r]: words labeled h by the hypothesis and r by the reference.
  std::vector<std::vector<std::size_t>> confusion;
  /// Reference speaker mapped to each hypothesis label (word-level mapping).
  std::vector<std::optional<int>> mapping;
  std::size_t num_words{0};
  std::size_t num_frames{0};
};

/// Error rates after the optimal hypothesis-to-reference relabeling.
/**
 * The word rate uses the word-level confusion matrix; the frame rate maps
 * independently on frames expanded from the words.
 */
DiarisationMetrics diarisation_metrics(std::span<const int> hyp, std::span<const int> ref,
                                       std::span<const WordSegment> words);

/// One segment per word: the normalized mean of the word's d-vectors.
std::vector<Segment> segments_from_words(std::span<const ObservationFrame> observations,
                                         std::span<const WordSegment> words);

struct InitConfig {
  double ahc_threshold{0.5};
  double alpha{0.1};
  double gamma{10.0};
  double sigma_move{100.0};
  double kappa{10.0};
  int num_bins{360};
};

struct InitResult {
  ModelParams params;
  Clustering clustering;
};

/// Builds ModelParams from word segments: AHC clusters give M, the centroids and the transition counts.
InitResult initialize_params(std::span<const ObservationFrame> observations, std::span<const WordSegment> words,
                             int num_channels, const InitConfig& config);

}  // namespace sspf

#endif  // SSPF_PIPELINE_HPP_
