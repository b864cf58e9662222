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

#include <cmath>
#include <cstdint>
#include <vector>

#include "optbench/model.hpp"
#include "optbench/numerics.hpp"

namespace optbench {

struct GradCheckResult {
  double max_rel = 0.0;  // worst vector-wise relative deviation over draws
  double max_abs = 0.0;  // worst single-coordinate absolute deviation
  std::size_t worst_draw = 0;
  std::size_t worst_index = 0;
  std::size_t draws = 0;
};

/// Random parameters and a random batch for a gradient check. For ReLU
/// networks, draws with a hidden pre-activation within `kink_margin` of 0 are
/// rejected so that finite differences never straddle a kink.
struct GradCheckDraw {
  ParamStore params;
  Batch batch;
};

inline bool near_relu_kink(const MlpSpec& spec, const ParamStore& params, const Batch& batch, double margin) {
  const auto cache = detail::forward_cached(spec, params.values(), batch.inputs);
  for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l)
    for (double z : cache.pre[l].data)
      if (std::abs(z) < margin) return true;
  return false;
}

inline GradCheckDraw gradcheck_draw(const MlpSpec& spec, Prng& rng, std::size_t batch_rows = 6,
                                    double kink_margin = 1e-4) {
  for (;;) {
    GradCheckDraw d;
    d.params = init_params(spec, rng);
    for (auto& w : d.params.values()) w += 0.3 * rng.normal();
    d.batch.inputs = Matrix(batch_rows, spec.layer_sizes.front());
    for (auto& x : d.batch.inputs.data) x = rng.normal();
    const auto out = spec.layer_sizes.back();
    if (spec.loss_kind == LossKind::cross_entropy) {
      d.batch.labels.resize(batch_rows);
      for (auto& k : d.batch.labels) k = rng.index(out);
    } else {
      d.batch.targets = Matrix(batch_rows, out);
      for (auto& t : d.batch.targets.data) t = rng.normal();
    }
    if (spec.hidden_activation != Activation::relu || !near_relu_kink(spec, d.params, d.batch, kink_margin))
      return d;
  }
}

/// Compares analytic and central-difference gradients over `draws` random
/// draws. `corrupt` perturbs the analytic gradient (negative control).
inline GradCheckResult run_gradcheck(const MlpSpec& spec, std::size_t draws, std::uint64_t seed = 1,
                                     double h = 1e-6, bool corrupt = false) {
  spec.validate();
  Prng rng(seed);
  GradCheckResult result;
  result.draws = draws;
  for (std::size_t k = 0; k < draws; ++k) {
    const auto d = gradcheck_draw(spec, rng);
    auto analytic = loss_and_grad(spec, d.params, d.batch).grad;
    if (corrupt) analytic[k % analytic.size()] += 1e-3;
    const auto numeric = finite_diff_grad(spec, d.params, d.batch, h);
    const auto dev = max_relative_deviation(analytic, numeric);
    result.max_abs = std::max(result.max_abs, dev.max_abs);
    if (dev.max_rel > result.max_rel || k == 0) {
      result.max_rel = dev.max_rel;
      result.worst_draw = k;
      result.worst_index = dev.worst_index;
    }
  }
  return result;
}

}  // namespace optbench
