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

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "optbench/errors.hpp"
#include "optbench/model.hpp"
#include "optbench/optim/baselines.hpp"
#include "optbench/optim/core.hpp"

namespace optbench {

inline constexpr std::array<std::pair<Algorithm, std::string_view>, 10> kAlgorithms{{
    {Algorithm::core, "core"},
    {Algorithm::sgd, "sgd"},
    {Algorithm::momentum, "momentum"},
    {Algorithm::nag, "nag"},
    {Algorithm::adam, "adam"},
    {Algorithm::adamax, "adamax"},
    {Algorithm::rmsprop, "rmsprop"},
    {Algorithm::adagrad, "adagrad"},
    {Algorithm::adadelta, "adadelta"},
    {Algorithm::rprop, "rprop"},
}};

inline std::string_view to_string(Algorithm a) {
  for (const auto& [alg, name] : kAlgorithms)
    if (alg == a) return name;
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [alg, n] : kAlgorithms)
    if (n == name) return alg;
  throw InvalidArgument("unknown optimizer algorithm '" + std::string(name) + "'");
}

inline std::string_view to_string(DecayMode m) {
  switch (m) {
    case DecayMode::none: return "none";
    case DecayMode::coupled: return "coupled";
    case DecayMode::decoupled: return "decoupled";
  }
  return "none";
}

inline DecayMode parse_decay_mode(std::string_view s) {
  if (s == "none") return DecayMode::none;
  if (s == "coupled") return DecayMode::coupled;
  if (s == "decoupled") return DecayMode::decoupled;
  throw InvalidArgument("unknown decay mode '" + std::string(s) + "'");
}

/// Algorithm tag plus hyperparameters. `core` is read when the algorithm is
/// CoRe, `baseline` otherwise.
struct OptimizerSpec {
  std::string label;
  Algorithm algorithm = Algorithm::core;
  CoreHyper core;
  BaselineHyper baseline;

  static OptimizerSpec defaults(Algorithm a) {
    OptimizerSpec spec;
    spec.algorithm = a;
    spec.label = std::string(to_string(a));
    if (a != Algorithm::core) spec.baseline = BaselineHyper::defaults_for(a);
    return spec;
  }

  [[nodiscard]] bool uses_step_size_bounds() const noexcept {
    return algorithm == Algorithm::core || algorithm == Algorithm::rprop;
  }

  void validate() const {
    if (algorithm == Algorithm::core) {
      core.validate();
    } else {
      if (baseline.algorithm != algorithm) throw InvalidArgument("baseline hyperparameters carry a different algorithm");
      baseline.validate();
    }
  }
};

/// Applies one learning-rate grid value: the maximal step size for CoRe and
/// RPROP, the learning rate for everything else.
inline OptimizerSpec with_learning_rate(OptimizerSpec spec, double lr) {
  if (spec.algorithm == Algorithm::core) {
    spec.core.s_max = lr;
  } else if (spec.algorithm == Algorithm::rprop) {
    spec.baseline.s_max = lr;
  } else {
    spec.baseline.gamma = lr;
  }
  return spec;
}

namespace detail {

inline void write_field(std::ostream& os, std::string_view name, std::span<const double> v) {
  os << name << ' ' << v.size();
  std::array<char, 32> buf{};
  for (double x : v) {
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    os << ' ' << std::string_view(buf.data(), static_cast<std::size_t>(end - buf.data()));
  }
  os << '\n';
}

inline std::vector<double> read_field(std::istream& is, std::string_view name, std::size_t expected) {
  std::string got;
  std::size_t len = 0;
  if (!(is >> got >> len) || got != name)
    throw InvalidArgument("snapshot: expected field '" + std::string(name) + "', got '" + got + "'");
  if (len != expected) throw InvalidArgument("snapshot: field '" + std::string(name) + "' has wrong length");
  std::vector<double> v(len);
  for (auto& x : v) {
    std::string tok;
    if (!(is >> tok)) throw InvalidArgument("snapshot: truncated field '" + std::string(name) + "'");
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw InvalidArgument("snapshot: bad number '" + tok + "' in field '" + std::string(name) + "'");
  }
  return v;
}

}  // namespace detail

/// A configured optimizer owning its state; the uniform step entry point for
/// all ten algorithms.
class Optimizer {
 public:
  Optimizer(const OptimizerSpec& spec, const GroupLayout& layout) : spec_(spec) {
    spec_.validate();
    if (spec_.algorithm == Algorithm::core) {
      impl_.emplace<CoreOptimizer>(spec_.core, layout);
      spec_.core = std::get<CoreOptimizer>(impl_).hyper();
    } else {
      spec_.baseline.s0 = std::clamp(spec_.baseline.s0, spec_.baseline.s_min, spec_.baseline.s_max);
      impl_.emplace<BaselineState>(layout_size(layout), spec_.baseline.s0);
    }
  }

  void step(std::span<double> weights, std::span<const double> grad) {
    if (auto* core = std::get_if<CoreOptimizer>(&impl_)) {
      core->step(weights, grad);
    } else {
      baseline_step(std::get<BaselineState>(impl_), weights, grad, spec_.baseline);
    }
  }

  [[nodiscard]] const OptimizerSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] Algorithm algorithm() const noexcept { return spec_.algorithm; }
  [[nodiscard]] const CoreOptimizer* core() const noexcept { return std::get_if<CoreOptimizer>(&impl_); }
  [[nodiscard]] const BaselineState* baseline() const noexcept { return std::get_if<BaselineState>(&impl_); }
  [[nodiscard]] std::int64_t steps_taken() const noexcept {
    if (const auto* c = core()) return c->state().tau;
    return std::get<BaselineState>(impl_).tau;
  }

  /// Text snapshot: a header line, then one line per state field holding
  /// `name length value...` with shortest round-trip decimals.
  void save_snapshot(std::ostream& os) const {
    os << "optbench-optimizer-state 1\n";
    os << "algorithm " << to_string(spec_.algorithm) << '\n';
    os << "tau " << steps_taken() << '\n';
    if (const auto* c = core()) {
      const auto& st = c->state();
      detail::write_field(os, "g", st.g);
      detail::write_field(os, "h", st.h);
      detail::write_field(os, "s", st.s);
      detail::write_field(os, "S", st.S);
      detail::write_field(os, "g_prev", st.g_prev);
      detail::write_field(os, "u", st.u);
      std::vector<double> mask(st.frozen_mask.begin(), st.frozen_mask.end());
      detail::write_field(os, "frozen_mask", mask);
    } else {
      const auto& st = std::get<BaselineState>(impl_);
      detail::write_field(os, "m", st.m);
      detail::write_field(os, "h", st.h);
      detail::write_field(os, "b", st.b);
      detail::write_field(os, "l", st.l);
      detail::write_field(os, "k", st.k);
      detail::write_field(os, "G_prev", st.G_prev);
      detail::write_field(os, "s", st.s);
    }
    os << "end\n";
  }

  [[nodiscard]] std::string snapshot() const {
    std::ostringstream os;
    save_snapshot(os);
    return os.str();
  }

  /// Restores state written by save_snapshot() for the same algorithm and
  /// parameter count.
  void load_snapshot(std::istream& is) {
    std::string word, value;
    int version = 0;
    if (!(is >> word >> version) || word != "optbench-optimizer-state" || version != 1)
      throw InvalidArgument("snapshot: bad header");
    if (!(is >> word >> value) || word != "algorithm" || value != to_string(spec_.algorithm))
      throw InvalidArgument("snapshot: algorithm does not match this optimizer");
    std::int64_t tau = 0;
    if (!(is >> word >> tau) || word != "tau" || tau < 0) throw InvalidArgument("snapshot: bad step counter");
    if (auto* c = std::get_if<CoreOptimizer>(&impl_)) {
      auto& st = c->mutable_state();
      const auto n = st.size();
      CoreState next;
      next.tau = tau;
      next.g = detail::read_field(is, "g", n);
      next.h = detail::read_field(is, "h", n);
      next.s = detail::read_field(is, "s", n);
      next.S = detail::read_field(is, "S", n);
      next.g_prev = detail::read_field(is, "g_prev", n);
      next.u = detail::read_field(is, "u", n);
      const auto mask = detail::read_field(is, "frozen_mask", n);
      next.frozen_mask.assign(mask.begin(), mask.end());
      expect_end(is);
      st = std::move(next);
    } else {
      auto& st = std::get<BaselineState>(impl_);
      const auto n = st.size();
      BaselineState next;
      next.tau = tau;
      next.m = detail::read_field(is, "m", n);
      next.h = detail::read_field(is, "h", n);
      next.b = detail::read_field(is, "b", n);
      next.l = detail::read_field(is, "l", n);
      next.k = detail::read_field(is, "k", n);
      next.G_prev = detail::read_field(is, "G_prev", n);
      next.s = detail::read_field(is, "s", n);
      expect_end(is);
      st = std::move(next);
    }
  }

  void load_snapshot(const std::string& text) {
    std::istringstream is(text);
    load_snapshot(is);
  }

 private:
  static void expect_end(std::istream& is) {
    std::string word;
    if (!(is >> word) || word != "end") throw InvalidArgument("snapshot: missing end marker");
  }

  OptimizerSpec spec_;
  std::variant<std::monostate, CoreOptimizer, BaselineState> impl_;
};

/// Allocates zeroed state sized to `layout` and returns the ready optimizer.
inline Optimizer make_optimizer(const OptimizerSpec& spec, const GroupLayout& layout) {
  return Optimizer(spec, layout);
}

}  // namespace optbench
