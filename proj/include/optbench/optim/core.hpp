// Copyright 2026 The opt-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "optbench/errors.hpp"
#include "optbench/model.hpp"

namespace optbench {

/// Hyperparameters of the continual resilient (CoRe) optimizer. Defaults are
/// the general-purpose recommendation; only `s_max` usually needs to change
/// with the batch regime (see recommended_s_max()).
struct CoreHyper {
  double beta1_a = 0.7375;
  double beta1_b = 0.8125;
  double beta1_c = 250.0;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  double eta_minus = 0.7375;
  double eta_plus = 1.2;
  double s_min = 1e-6;
  double s_max = 1e-3;
  double s0 = 1e-3;
  /// Weight decay for groups without an entry in `d_per_group`.
  double d = 0.1;
  std::map<std::string, double> d_per_group;
  std::int64_t t_hist = 250;
  /// Frozen fraction for groups without an entry in `p_frozen_per_group`.
  double p_frozen = 0.0;
  std::map<std::string, double> p_frozen_per_group;
  bool maximize = false;

  void validate() const {
    auto in01 = [](double v) { return v >= 0.0 && v < 1.0; };
    if (!in01(beta1_a) || !in01(beta1_b) || !in01(beta2)) throw InvalidArgument("CoRe decay rates must lie in [0, 1)");
    if (!(beta1_c > 0.0)) throw InvalidArgument("beta1_c must be positive");
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (!(eta_minus > 0.0 && eta_minus <= 1.0)) throw InvalidArgument("eta_minus must lie in (0, 1]");
    if (!(eta_plus >= 1.0)) throw InvalidArgument("eta_plus must be >= 1");
    if (!(s_min > 0.0 && s_min <= s_max)) throw InvalidArgument("need 0 < s_min <= s_max");
    if (!(s0 > 0.0)) throw InvalidArgument("s0 must be positive");
    if (t_hist < 1) throw InvalidArgument("t_hist must be a positive integer");
    auto check_d = [&](double v) {
      if (!(v >= 0.0 && v * s_max < 1.0)) throw InvalidArgument("weight decay d must lie in [0, 1/s_max)");
    };
    auto check_p = [&](double v) {
      if (!in01(v)) throw InvalidArgument("p_frozen must lie in [0, 1)");
    };
    check_d(d);
    check_p(p_frozen);
    for (const auto& [_, v] : d_per_group) check_d(v);
    for (const auto& [_, v] : p_frozen_per_group) check_p(v);
  }

  [[nodiscard]] double decay_for(const std::string& group) const {
    auto it = d_per_group.find(group);
    return it == d_per_group.end() ? d : it->second;
  }
  [[nodiscard]] double p_frozen_for(const std::string& group) const {
    auto it = p_frozen_per_group.find(group);
    return it == p_frozen_per_group.end() ? p_frozen : it->second;
  }
};

/// First-moment decay at update `tau` (1-based): a Gaussian blend from
/// beta1_a at tau = 1 toward beta1_b.
inline double beta1_schedule(std::int64_t tau, const CoreHyper& hyper) {
  if (tau < 1) throw InvalidArgument("beta1_schedule needs tau >= 1");
  const double x = static_cast<double>(tau - 1) / hyper.beta1_c;
  return hyper.beta1_b + (hyper.beta1_a - hyper.beta1_b) * std::exp(-x * x);
}

/// Per-weight CoRe state. Vectors all have the parameter count as length.
struct CoreState {
  std::vector<double> g;       // gradient moving average
  std::vector<double> h;       // squared-gradient moving average
  std::vector<double> s;       // step sizes
  std::vector<double> S;       // importance scores
  std::vector<double> g_prev;  // g of the previous update
  std::vector<double> u;       // last Adam-like quotient
  std::vector<std::uint8_t> frozen_mask;  // 1 where the plasticity factor is 0
  std::int64_t tau = 0;

  CoreState() = default;
  CoreState(std::size_t n, double s0)
      : g(n, 0.0), h(n, 0.0), s(n, s0), S(n, 0.0), g_prev(n, 0.0), u(n, 0.0), frozen_mask(n, 0) {}

  [[nodiscard]] std::size_t size() const noexcept { return g.size(); }
};

/// Number of frozen weights for a group: floor(p_frozen * |group|).
inline std::size_t frozen_count(double p_frozen, std::size_t group_size) {
  return static_cast<std::size_t>(std::floor(p_frozen * static_cast<double>(group_size)));
}

/// Marks the `n` highest scores of `scores` in `mask` (ties: lower index
/// first). Other entries are cleared.
inline void mark_top_n(std::span<const double> scores, std::size_t n, std::span<std::uint8_t> mask,
                       std::vector<std::size_t>& scratch) {
  std::fill(mask.begin(), mask.end(), std::uint8_t{0});
  if (n == 0) return;
  scratch.resize(scores.size());
  std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  auto higher = [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(n - 1), scratch.end(), higher);
  for (std::size_t k = 0; k < n; ++k) mask[scratch[k]] = 1;
}

/// CoRe optimizer bound to a parameter layout.
class CoreOptimizer {
 public:
  CoreOptimizer(CoreHyper hyper, GroupLayout layout) : hyper_(std::move(hyper)), layout_(std::move(layout)) {
    hyper_.validate();
    hyper_.s0 = std::clamp(hyper_.s0, hyper_.s_min, hyper_.s_max);
    const auto n = layout_size(layout_);
    state_ = CoreState(n, hyper_.s0);
    delta_.assign(n, 0.0);
    for (const auto& grp : layout_) {
      group_decay_.push_back(hyper_.decay_for(grp.name));
      group_frozen_.push_back(frozen_count(hyper_.p_frozen_for(grp.name), grp.length));
    }
  }

  /// One update of `weights` in place. Returns the applied weight change.
  /// On a non-finite gradient the state and weights are left untouched.
  std::span<const double> step(std::span<double> weights, std::span<const double> grad) {
    const std::size_t n = state_.size();
    if (weights.size() != n || grad.size() != n) throw InvalidArgument("CoRe step: length mismatch");
    for (double x : grad)
      if (!std::isfinite(x)) throw NumericFailure("CoRe step: non-finite gradient");

    auto& st = state_;
    const double sign = hyper_.maximize ? -1.0 : 1.0;
    st.tau += 1;
    const double b1 = beta1_schedule(st.tau, hyper_);
    const double b2 = hyper_.beta2;
    const double tau = static_cast<double>(st.tau);
    const double corr1 = 1.0 - std::pow(b1, tau);
    const double corr2 = 1.0 - std::pow(b2, tau);
    const double inv_hist = 1.0 / static_cast<double>(hyper_.t_hist);
    const bool past_hist = st.tau > hyper_.t_hist;

    // Plasticity factors from the previous importance scores.
    std::fill(st.frozen_mask.begin(), st.frozen_mask.end(), std::uint8_t{0});
    if (past_hist) {
      for (std::size_t k = 0; k < layout_.size(); ++k) {
        const auto& grp = layout_[k];
        if (group_frozen_[k] == 0) continue;
        mark_top_n(std::span<const double>(st.S).subspan(grp.offset, grp.length), group_frozen_[k],
                   std::span(st.frozen_mask).subspan(grp.offset, grp.length), scratch_);
      }
    }

    for (std::size_t k = 0; k < layout_.size(); ++k) {
      const auto& grp = layout_[k];
      const double d = group_decay_[k];
      for (std::size_t i = grp.offset; i < grp.offset + grp.length; ++i) {
        const double G = sign * grad[i];
        st.g[i] = b1 * st.g[i] + (1.0 - b1) * G;
        st.h[i] = b2 * st.h[i] + (1.0 - b2) * G * G;
        const double u = (st.g[i] / corr1) / (std::sqrt(st.h[i] / corr2) + hyper_.epsilon);
        st.u[i] = u;
        const double P = st.frozen_mask[i] ? 0.0 : 1.0;

        const double agreement = st.g_prev[i] * st.g[i] * P;
        if (agreement > 0.0) {
          st.s[i] = std::min(hyper_.eta_plus * st.s[i], hyper_.s_max);
        } else if (agreement < 0.0) {
          st.s[i] = std::max(hyper_.eta_minus * st.s[i], hyper_.s_min);
        }

        const double step = u * P * st.s[i];
        const double before = weights[i];
        weights[i] = (1.0 - d * std::abs(step)) * before - step;
        delta_[i] = weights[i] - before;

        const double contribution = inv_hist * st.g[i] * step;
        st.S[i] = past_hist ? (1.0 - inv_hist) * st.S[i] + contribution : st.S[i] + contribution;
        st.g_prev[i] = st.g[i];
      }
    }
    return delta_;
  }

  [[nodiscard]] const CoreHyper& hyper() const noexcept { return hyper_; }
  [[nodiscard]] const GroupLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] const CoreState& state() const noexcept { return state_; }
  [[nodiscard]] CoreState& mutable_state() noexcept { return state_; }
  [[nodiscard]] std::span<const std::size_t> frozen_counts() const noexcept { return group_frozen_; }

 private:
  CoreHyper hyper_;
  GroupLayout layout_;
  CoreState state_;
  std::vector<double> group_decay_;
  std::vector<std::size_t> group_frozen_;
  std::vector<double> delta_;
  std::vector<std::size_t> scratch_;
};

}  // namespace optbench
