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

#ifndef SSPF_IO_HPP_
#define SSPF_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sspf/decode.hpp"
#include "sspf/filter.hpp"
#include "sspf/model.hpp"
#include "sspf/simkit.hpp"

/**
 * \file
 * \brief File formats: JSON Lines datasets and outputs, JSON model parameters
 * and the binary ensemble store. Every index in these files (frame, channel,
 * speaker, word) is 0-based.
 */

namespace sspf::io {

/// `{"t":int,"channels":[{"n":int,"dvec":[...],"ssl":[...]?,"doa":float?}]}` per line.
/// Frames missing from the file are silent; the meeting length is max(t) + 1 unless
/// `num_frames` is larger.
std::vector<ObservationFrame> read_observations(const std::filesystem::path& path, std::size_t num_frames = 0);
void write_observations(const std::filesystem::path& path, std::span<const ObservationFrame> frames);

/// `{"l":int,"n":int,"start":int,"end":int}` per line.
std::vector<WordSegment> read_words(const std::filesystem::path& path);
void write_words(const std::filesystem::path& path, std::span<const WordSegment> words);

/// `{"l":int,"speaker":int}` per line, in word order.
std::vector<int> read_labels(const std::filesystem::path& path, std::span<const WordSegment> words);
void write_labels(const std::filesystem::path& path, std::span<const WordSegment> words, std::span<const int> labels);

/// `{"t":int,"n":int,"p":[...]}` per line.
PosteriorTable read_posteriors(const std::filesystem::path& path);
void write_posteriors(const std::filesystem::path& path, const PosteriorTable& table);

/// `{"t":int,"m":int,"mean":float,"resultant":float}` per line.
std::vector<TraceEntry> read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, std::span<const TraceEntry> trace);

ModelParams read_params(const std::filesystem::path& path);
void write_params(const std::filesystem::path& path, const ModelParams& params);

/// `{"t":int,"active":[speaker or -1 per channel]}` per line.
void write_activity(const std::filesystem::path& path, const GroundTruth& truth);

inline constexpr char kStoreMagic[8] = {'S', 'S', 'P', 'F', 'E', 'N', 'S', '\0'};
inline constexpr std::uint32_t kStoreVersion = 1;

/// Streams ensembles into the binary store.
/**
 * Layout (native little-endian): magic[8], u32 version, u64 R, u64 T, u32 M,
 * u32 N, then T frame blocks of u64 t, u8 resampled, u8 allow_switch,
 * u8 has_ancestors, i32 labels[R*N], f64 angles[R*M], f64 log_weights[R],
 * f64 weights[R], u32 ancestors[R] (only when has_ancestors). T is patched
 * into the header when the writer is closed.
 */
class EnsembleStoreWriter {
 public:
  EnsembleStoreWriter(const std::filesystem::path& path, std::uint64_t num_particles, int num_speakers,
                      int num_channels);
  EnsembleStoreWriter(const EnsembleStoreWriter&) = delete;
  EnsembleStoreWriter& operator=(const EnsembleStoreWriter&) = delete;
  ~EnsembleStoreWriter();

  void write(const ParticleEnsemble& ensemble);
  void close();

 private:
  std::ofstream out_;
  std::uint64_t num_particles_;
  std::uint64_t frames_{0};
  int num_speakers_;
  int num_channels_;
  bool closed_{false};
};

std::vector<ParticleEnsemble> read_ensemble_store(const std::filesystem::path& path);
void write_ensemble_store(const std::filesystem::path& path, std::span<const ParticleEnsemble> ensembles);

}  // namespace sspf::io

#endif  // SSPF_IO_HPP_
