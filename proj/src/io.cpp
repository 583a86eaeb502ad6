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

#include "sspf/io.hpp"

#include <algorithm>
#include <cstring>
#include <map>

#include "json.hpp"
#include "sspf/errors.hpp"

namespace sspf::io {

namespace {

using nlohmann::json;

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) {
    throw ValidationError("cannot open " + path.string() + " for reading");
  }
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) {
    throw ValidationError("cannot open " + path.string() + " for writing");
  }
  return out;
}

// Calls fn(record, line_number) for every non-empty line.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      fn(json::parse(line), line_no);
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::size_t to_index(const json& v, const char* name) {
  const auto x = v.at(name).get<long long>();
  if (x < 0) {
    throw ValidationError(std::string(name) + " must be nonnegative");
  }
  return static_cast<std::size_t>(x);
}

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void put_span(std::ofstream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw ValidationError("ensemble store is truncated");
  }
  return value;
}

template <typename T>
void get_span(std::ifstream& in, std::span<T> values) {
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!in) {
    throw ValidationError("ensemble store is truncated");
  }
}

}  // namespace

std::vector<ObservationFrame> read_observations(const std::filesystem::path& path, std::size_t num_frames) {
  std::map<std::size_t, ObservationFrame> by_frame;
  for_each_record(path, [&](const json& rec, std::size_t) {
    ObservationFrame frame;
    frame.t = to_index(rec, "t");
    for (const auto& c : rec.at("channels")) {
      ChannelObservation obs;
      obs.channel = static_cast<int>(to_index(c, "n"));
      obs.dvec = c.at("dvec").get<std::vector<double>>();
      if (c.contains("ssl") && !c["ssl"].is_null()) {
        obs.ssl = c["ssl"].get<std::vector<double>>();
      }
      if (c.contains("doa") && !c["doa"].is_null()) {
        obs.doa = c["doa"].get<double>();
      }
      frame.channels.push_back(std::move(obs));
    }
    if (!by_frame.emplace(frame.t, std::move(frame)).second) {
      throw ValidationError("duplicate frame record");
    }
  });
  std::size_t count = num_frames;
  if (!by_frame.empty()) {
    count = std::max(count, by_frame.rbegin()->first + 1);
  }
  std::vector<ObservationFrame> frames(count);
  for (std::size_t t = 0; t < count; ++t) {
    frames[t].t = t;
  }
  for (auto& [t, frame] : by_frame) {
    frames[t] = std::move(frame);
  }
  return frames;
}

void write_observations(const std::filesystem::path& path, std::span<const ObservationFrame> frames) {
  auto out = open_out(path);
  for (const auto& f : frames) {
    json rec;
    rec["t"] = f.t;
    rec["channels"] = json::array();
    for (const auto& c : f.channels) {
      json ch;
      ch["n"] = c.channel;
      ch["dvec"] = c.dvec;
      if (c.ssl) {
        ch["ssl"] = *c.ssl;
      }
      if (c.doa) {
        ch["doa"] = *c.doa;
      }
      rec["channels"].push_back(std::move(ch));
    }
    out << rec.dump() << '\n';
  }
}

std::vector<WordSegment> read_words(const std::filesystem::path& path) {
  std::vector<WordSegment> words;
  for_each_record(path, [&](const json& rec, std::size_t) {
    WordSegment w;
    w.id = static_cast<int>(to_index(rec, "l"));
    w.channel = static_cast<int>(to_index(rec, "n"));
    w.start = to_index(rec, "start");
    w.end = to_index(rec, "end");
    if (w.start > w.end) {
      throw ValidationError("word " + std::to_string(w.id) + " is empty (start after end)");
    }
    words.push_back(w);
  });
  return words;
}

void write_words(const std::filesystem::path& path, std::span<const WordSegment> words) {
  auto out = open_out(path);
  for (const auto& w : words) {
    out << json{{"l", w.id}, {"n", w.channel}, {"start", w.start}, {"end", w.end}}.dump() << '\n';
  }
}

std::vector<int> read_labels(const std::filesystem::path& path, std::span<const WordSegment> words) {
  std::map<int, int> by_word;
  for_each_record(path, [&](const json& rec, std::size_t) {
    const auto l = static_cast<int>(to_index(rec, "l"));
    const auto s = static_cast<int>(to_index(rec, "speaker"));
    if (!by_word.emplace(l, s).second) {
      throw ValidationError("duplicate label for word " + std::to_string(l));
    }
  });
  if (by_word.size() != words.size()) {
    throw ValidationError(path.string() + ": labels cover " + std::to_string(by_word.size()) + " words, expected " +
                          std::to_string(words.size()));
  }
  std::vector<int> labels;
  labels.reserve(words.size());
  for (const auto& w : words) {
    const auto it = by_word.find(w.id);
    if (it == by_word.end()) {
      throw ValidationError(path.string() + ": no label for word " + std::to_string(w.id));
    }
    labels.push_back(it->second);
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, std::span<const WordSegment> words, std::span<const int> labels) {
  if (words.size() != labels.size()) {
    throw ValidationError("label count does not match word count");
  }
  auto out = open_out(path);
  for (std::size_t i = 0; i < words.size(); ++i) {
    out << json{{"l", words[i].id}, {"speaker", labels[i]}}.dump() << '\n';
  }
}

PosteriorTable read_posteriors(const std::filesystem::path& path) {
  struct Row {
    std::size_t t;
    int n;
    std::vector<double> p;
  };
  std::vector<Row> rows;
  std::size_t frames = 0;
  int channels = 0;
  int speakers = -1;
  for_each_record(path, [&](const json& rec, std::size_t) {
    Row r{to_index(rec, "t"), static_cast<int>(to_index(rec, "n")), rec.at("p").get<std::vector<double>>()};
    if (speakers >= 0 && static_cast<int>(r.p.size()) != speakers) {
      throw ValidationError("posterior length differs from earlier records");
    }
    speakers = static_cast<int>(r.p.size());
    frames = std::max(frames, r.t + 1);
    channels = std::max(channels, r.n + 1);
    rows.push_back(std::move(r));
  });
  PosteriorTable table(frames, channels, std::max(speakers, 0));
  for (const auto& r : rows) {
    std::copy(r.p.begin(), r.p.end(), table.at(r.t, r.n).begin());
  }
  return table;
}

void write_posteriors(const std::filesystem::path& path, const PosteriorTable& table) {
  auto out = open_out(path);
  for (std::size_t t = 0; t < table.frames(); ++t) {
    for (int n = 0; n < table.channels(); ++n) {
      const auto p = table.at(t, n);
      out << json{{"t", t}, {"n", n}, {"p", std::vector<double>(p.begin(), p.end())}}.dump() << '\n';
    }
  }
}

std::vector<TraceEntry> read_trace(const std::filesystem::path& path) {
  std::vector<TraceEntry> trace;
  for_each_record(path, [&](const json& rec, std::size_t) {
    trace.push_back({to_index(rec, "t"), static_cast<int>(to_index(rec, "m")), rec.at("mean").get<double>(),
                     rec.at("resultant").get<double>()});
  });
  return trace;
}

void write_trace(const std::filesystem::path& path, std::span<const TraceEntry> trace) {
  auto out = open_out(path);
  for (const auto& e : trace) {
    out << json{{"t", e.t}, {"m", e.speaker}, {"mean", e.mean}, {"resultant", e.resultant}}.dump() << '\n';
  }
}

ModelParams read_params(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    const json j = json::parse(in);
    ModelParams p;
    p.num_speakers = j.at("num_speakers").get<int>();
    p.num_channels = j.at("num_channels").get<int>();
    p.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    p.transitions = j.at("transitions").get<std::vector<std::vector<double>>>();
    p.gamma = j.at("gamma").get<double>();
    p.sigma_move = j.at("sigma_move").get<double>();
    p.kappa = j.at("kappa").get<double>();
    p.bins = BinGeometry(j.at("num_bins").get<int>());
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_params(const std::filesystem::path& path, const ModelParams& p) {
  json j;
  j["num_speakers"] = p.num_speakers;
  j["num_channels"] = p.num_channels;
  j["centroids"] = p.centroids;
  j["transitions"] = p.transitions;
  j["gamma"] = p.gamma;
  j["sigma_move"] = p.sigma_move;
  j["kappa"] = p.kappa;
  j["num_bins"] = p.bins.size();
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_activity(const std::filesystem::path& path, const GroundTruth& truth) {
  auto out = open_out(path);
  const auto n = static_cast<std::size_t>(truth.num_channels);
  for (std::size_t t = 0; t * n < truth.active.size(); ++t) {
    std::vector<int> active(truth.active.begin() + static_cast<std::ptrdiff_t>(t * n),
                            truth.active.begin() + static_cast<std::ptrdiff_t>((t + 1) * n));
    out << json{{"t", t}, {"active", active}}.dump() << '\n';
  }
}

EnsembleStoreWriter::EnsembleStoreWriter(const std::filesystem::path& path, std::uint64_t num_particles,
                                         int num_speakers, int num_channels)
    : out_{open_out(path, true)},
      num_particles_{num_particles},
      num_speakers_{num_speakers},
      num_channels_{num_channels} {
  out_.write(kStoreMagic, sizeof(kStoreMagic));
  put(out_, kStoreVersion);
  put(out_, num_particles_);
  put(out_, frames_);
  put(out_, static_cast<std::uint32_t>(num_speakers_));
  put(out_, static_cast<std::uint32_t>(num_channels_));
}

EnsembleStoreWriter::~EnsembleStoreWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw; an unclosed store fails its header check on read
  }
}

void EnsembleStoreWriter::write(const ParticleEnsemble& e) {
  if (e.size() != num_particles_ || e.num_speakers != num_speakers_ || e.num_channels != num_channels_) {
    throw ValidationError("ensemble shape does not match the store header");
  }
  put(out_, static_cast<std::uint64_t>(e.t));
  put(out_, static_cast<std::uint8_t>(e.resampled ? 1 : 0));
  put(out_, static_cast<std::uint8_t>(e.allow_switch ? 1 : 0));
  put(out_, static_cast<std::uint8_t>(e.ancestors.empty() ? 0 : 1));
  put_span<int>(out_, e.labels);
  put_span<double>(out_, e.angles);
  put_span<double>(out_, e.log_weights);
  put_span<double>(out_, e.weights);
  if (!e.ancestors.empty()) {
    put_span<std::uint32_t>(out_, e.ancestors);
  }
  ++frames_;
}

void EnsembleStoreWriter::close() {
  if (closed_) {
    return;
  }
  closed_ = true;
  out_.seekp(sizeof(kStoreMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t));
  put(out_, frames_);
  out_.close();
  if (!out_) {
    throw ValidationError("failed to finish writing the ensemble store");
  }
}

std::vector<ParticleEnsemble> read_ensemble_store(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  char magic[sizeof(kStoreMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kStoreMagic, sizeof(magic)) != 0) {
    throw ValidationError(path.string() + " is not an ensemble store");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kStoreVersion) {
    throw ValidationError("unsupported ensemble store version " + std::to_string(version));
  }
  const auto r_count = get<std::uint64_t>(in);
  const auto t_count = get<std::uint64_t>(in);
  const auto m_count = static_cast<int>(get<std::uint32_t>(in));
  const auto n_count = static_cast<int>(get<std::uint32_t>(in));
  std::vector<ParticleEnsemble> out(t_count);
  for (auto& e : out) {
    e.num_speakers = m_count;
    e.num_channels = n_count;
    e.t = get<std::uint64_t>(in);
    e.resampled = get<std::uint8_t>(in) != 0;
    e.allow_switch = get<std::uint8_t>(in) != 0;
    const bool has_ancestors = get<std::uint8_t>(in) != 0;
    e.resize(r_count);
    get_span<int>(in, e.labels);
    get_span<double>(in, e.angles);
    get_span<double>(in, e.log_weights);
    get_span<double>(in, e.weights);
    if (has_ancestors) {
      e.ancestors.resize(r_count);
      get_span<std::uint32_t>(in, e.ancestors);
    }
  }
  return out;
}

void write_ensemble_store(const std::filesystem::path& path, std::span<const ParticleEnsemble> ensembles) {
  if (ensembles.empty()) {
    throw ValidationError("no ensembles to store");
  }
  const auto& first = ensembles.front();
  EnsembleStoreWriter writer(path, first.size(), first.num_speakers, first.num_channels);
  for (const auto& e : ensembles) {
    writer.write(e);
  }
  writer.close();
}

}  // namespace sspf::io
