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

#include "sspf/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sspf/errors.hpp"
#include "sspf/parallel.hpp"

namespace sspf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Particle subset laid out for the pairwise transition kernel.
struct KernelSet {
  std::vector<std::uint32_t> source;
  std::vector<int> labels;
  std::vector<double> cos_angles;
  std::vector<double> sin_angles;
  std::vector<double> log_weights;
};

KernelSet make_set(const ParticleEnsemble& e, std::span<const std::uint32_t> chosen) {
  const auto n_ch = static_cast<std::size_t>(e.num_channels);
  const auto n_spk = static_cast<std::size_t>(e.num_speakers);
  KernelSet s;
  s.source.assign(chosen.begin(), chosen.end());
  s.labels.resize(chosen.size() * n_ch);
  s.cos_angles.resize(chosen.size() * n_spk);
  s.sin_angles.resize(chosen.size() * n_spk);
  s.log_weights.resize(chosen.size());
  double total = 0.0;
  for (const auto idx : chosen) {
    total += e.weights[idx];
  }
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const auto p = e.particle(chosen[k]);
    std::copy(p.labels.begin(), p.labels.end(), s.labels.begin() + static_cast<std::ptrdiff_t>(k * n_ch));
    for (std::size_t m = 0; m < n_spk; ++m) {
      s.cos_angles[k * n_spk + m] = std::cos(p.angles[m]);
      s.sin_angles[k * n_spk + m] = std::sin(p.angles[m]);
    }
    const double w = total > 0.0 ? e.weights[chosen[k]] / total : 0.0;
    s.log_weights[k] = w > 0.0 ? std::log(w) : kNegInf;
  }
  return s;
}

struct LogSumExp {
  double peak{kNegInf};
  double sum{0.0};

  void add(double x) {
    if (x == kNegInf) {
      return;
    }
    if (x <= peak) {
      sum += std::exp(x - peak);
    } else {
      sum = sum * std::exp(peak - x) + 1.0;
      peak = x;
    }
  }

  [[nodiscard]] double value() const { return peak == kNegInf ? kNegInf : peak + std::log(sum); }
};

// log p(z_to | z_from) up to a constant shared by every pair.
class TransitionKernel {
 public:
  TransitionKernel(const ModelParams& params, bool allow_switch)
      : m_{static_cast<std::size_t>(params.num_speakers)},
        n_{static_cast<std::size_t>(params.num_channels)},
        sigma_{params.sigma_move},
        log_a_(m_ * m_) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        const double a = allow_switch ? params.transitions[i][j] : (i == j ? 1.0 : 0.0);
        log_a_[i * m_ + j] = a > 0.0 ? std::log(a) : kNegInf;
      }
    }
  }

  [[nodiscard]] double operator()(const KernelSet& from, std::size_t r, const KernelSet& to, std::size_t i) const {
    const int* qf = from.labels.data() + r * n_;
    const int* qt = to.labels.data() + i * n_;
    double lp = 0.0;
    for (std::size_t n = 0; n < n_; ++n) {
      lp += log_a_[static_cast<std::size_t>(qf[n]) * m_ + static_cast<std::size_t>(qt[n])];
    }
    if (lp == kNegInf) {
      return lp;
    }
    const double* cf = from.cos_angles.data() + r * m_;
    const double* sf = from.sin_angles.data() + r * m_;
    const double* ct = to.cos_angles.data() + i * m_;
    const double* st = to.sin_angles.data() + i * m_;
    double c = 0.0;
    for (std::size_t m = 0; m < m_; ++m) {
      c += cf[m] * ct[m] + sf[m] * st[m];
    }
    return lp + sigma_ * c;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  double sigma_;
  std::vector<double> log_a_;
};

std::vector<std::uint32_t> choose_subset(std::size_t r_count, std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> idx(r_count);
  std::iota(idx.begin(), idx.end(), 0U);
  if (k >= r_count) {
    return idx;
  }
  // partial Fisher-Yates
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t span = r_count - i;
    std::size_t j = i + std::min(span - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(span)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

ParticleEnsemble subsample(const ParticleEnsemble& ensemble, std::size_t k, Rng& rng,
                           std::vector<std::uint32_t>* chosen) {
  const std::size_t r_count = ensemble.size();
  if (k < 1 || k > r_count) {
    throw ValidationError("sub-sample size must lie in [1, " + std::to_string(r_count) + "], got " +
                          std::to_string(k));
  }
  const auto idx = choose_subset(r_count, k, rng);
  ParticleEnsemble out;
  out.t = ensemble.t;
  out.num_channels = ensemble.num_channels;
  out.num_speakers = ensemble.num_speakers;
  out.resampled = ensemble.resampled;
  out.allow_switch = ensemble.allow_switch;
  out.resize(k);
  const auto n_ch = static_cast<std::size_t>(ensemble.num_channels);
  const auto n_spk = static_cast<std::size_t>(ensemble.num_speakers);
  double total = 0.0;
  for (const auto i : idx) {
    total += ensemble.weights[i];
  }
  for (std::size_t s = 0; s < k; ++s) {
    const auto p = ensemble.particle(idx[s]);
    std::copy(p.labels.begin(), p.labels.end(), out.labels.begin() + static_cast<std::ptrdiff_t>(s * n_ch));
    std::copy(p.angles.begin(), p.angles.end(), out.angles.begin() + static_cast<std::ptrdiff_t>(s * n_spk));
    out.weights[s] = total > 0.0 ? ensemble.weights[idx[s]] / total : 1.0 / static_cast<double>(k);
    out.log_weights[s] = out.weights[s] > 0.0 ? std::log(out.weights[s]) : kNegInf;
  }
  if (!ensemble.ancestors.empty()) {
    out.ancestors.resize(k);
    for (std::size_t s = 0; s < k; ++s) {
      out.ancestors[s] = ensemble.ancestors[idx[s]];
    }
  }
  if (chosen != nullptr) {
    *chosen = idx;
  }
  return out;
}

std::vector<SmoothedEnsemble> backward_pass(std::span<const ParticleEnsemble> ensembles,
                                            std::span<const WordSegment> words, const ModelParams& params,
                                            const FilterConfig& config, std::size_t k_backward) {
  if (k_backward < 1) {
    throw ValidationError("backward particle count must be at least 1");
  }
  const std::size_t t_count = ensembles.size();
  std::vector<SmoothedEnsemble> out(t_count);
  if (t_count == 0) {
    return out;
  }
  const auto boundaries = word_boundary_mask(words, t_count);
  const int threads = thread_count();

  const auto make_frame_set = [&](std::size_t t) {
    Rng rng = purpose_stream(config.seed, t, 0, StreamPurpose::kSubsample);
    const auto idx = choose_subset(ensembles[t].size(), k_backward, rng);
    return make_set(ensembles[t], idx);
  };

  KernelSet next = make_frame_set(t_count - 1);
  std::vector<double> next_log_smoothed = next.log_weights;
  out[t_count - 1].t = ensembles[t_count - 1].t;
  out[t_count - 1].indices = next.source;
  out[t_count - 1].backward_weights.resize(next.source.size());
  for (std::size_t i = 0; i < next.source.size(); ++i) {
    out[t_count - 1].backward_weights[i] = std::exp(next.log_weights[i]);
  }

  for (std::size_t t = t_count - 1; t-- > 0;) {
    KernelSet cur = make_frame_set(t);
    const bool allow_switch = !config.restrict_switch_to_word_boundaries || boundaries[t + 1];
    const TransitionKernel kernel(params, allow_switch);
    const auto k_cur = static_cast<std::ptrdiff_t>(cur.source.size());
    const auto k_next = static_cast<std::ptrdiff_t>(next.source.size());

    // coef_i = log ws_{t+1}(i) - log sum_j w_t(j) p(z_{t+1}^i | z_t^j)
    std::vector<double> coef(next.source.size());
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t is = 0; is < k_next; ++is) {
      const auto i = static_cast<std::size_t>(is);
      if (next_log_smoothed[i] == kNegInf) {
        coef[i] = kNegInf;
        continue;
      }
      LogSumExp lse;
      for (std::size_t j = 0; j < cur.source.size(); ++j) {
        if (cur.log_weights[j] != kNegInf) {
          lse.add(cur.log_weights[j] + kernel(cur, j, next, i));
        }
      }
      const double den = lse.value();
      coef[i] = den == kNegInf ? kNegInf : next_log_smoothed[i] - den;
    }

    std::vector<double> log_smoothed(cur.source.size());
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t rs = 0; rs < k_cur; ++rs) {
      const auto r = static_cast<std::size_t>(rs);
      if (cur.log_weights[r] == kNegInf) {
        log_smoothed[r] = kNegInf;
        continue;
      }
      LogSumExp lse;
      for (std::size_t i = 0; i < next.source.size(); ++i) {
        if (coef[i] != kNegInf) {
          lse.add(coef[i] + kernel(cur, r, next, i));
        }
      }
      log_smoothed[r] = cur.log_weights[r] + lse.value();
    }

    double peak = kNegInf;
    for (const double v : log_smoothed) {
      peak = std::max(peak, v);
    }
    if (!std::isfinite(peak)) {
      throw ModelError("backward weights vanished (particle impoverishment)", ensembles[t].t);
    }
    auto& frame = out[t];
    frame.t = ensembles[t].t;
    frame.indices = cur.source;
    frame.backward_weights.resize(log_smoothed.size());
    double total = 0.0;
    for (std::size_t r = 0; r < log_smoothed.size(); ++r) {
      frame.backward_weights[r] = std::exp(log_smoothed[r] - peak);
      total += frame.backward_weights[r];
    }
    const double log_total = peak + std::log(total);
    for (std::size_t r = 0; r < log_smoothed.size(); ++r) {
      frame.backward_weights[r] /= total;
      log_smoothed[r] -= log_total;
    }
    next = std::move(cur);
    next_log_smoothed = std::move(log_smoothed);
  }
  return out;
}

}  // namespace sspf
