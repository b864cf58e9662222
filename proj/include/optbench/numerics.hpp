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
#include <numbers>
#include <span>
#include <vector>

#include "optbench/errors.hpp"

namespace optbench {

/// SplitMix64 generator. Every random draw in the library goes through this
/// type so that a seed reproduces the same run on any platform.
class Prng {
 public:
  static constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr Prng(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t next_u64() noexcept {
    state_ += kGoldenGamma;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  constexpr double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// lo + (hi - lo) * u. Advances the state exactly once.
  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw InvalidArgument("Prng::uniform requires lo < hi");
    return lo + (hi - lo) * next_unit();
  }

  /// Box-Muller, cosine branch only. Always consumes two uniforms.
  double normal() noexcept {
    double u1 = next_unit();
    const double u2 = next_unit();
    // (0, 1] for the log argument
    if (u1 == 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Index in [0, n) for n >= 1.
  std::size_t index(std::size_t n) noexcept {
    auto k = static_cast<std::size_t>(next_unit() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  [[nodiscard]] constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Independent stream seed for sub-task `index` of `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return Prng::mix(master + (index + 1) * Prng::kGoldenGamma);
}

/// Pairwise (cascade) summation; result does not depend on accumulation order
/// within a block as much as naive summation does.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kBlock = 8;
  if (v.size() <= kBlock) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  /// Set when only one value was available and `std` was reported as 0.
  bool single_sample = false;
};

/// Arithmetic mean and sample (N-1) standard deviation.
inline MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("mean_std of an empty list");
  const auto n = static_cast<double>(values.size());
  MeanStd r;
  r.mean = pairwise_sum(values) / n;
  if (values.size() == 1) {
    r.single_sample = true;
    return r;
  }
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - r.mean;
    sq[i] = d * d;
  }
  r.std = std::sqrt(pairwise_sum(sq) / (n - 1.0));
  return r;
}

}  // namespace optbench
