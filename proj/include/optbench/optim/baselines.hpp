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
#include <cstdint>
#include <span>
#include <vector>

#include "optbench/errors.hpp"

namespace optbench {

enum class Algorithm { core, sgd, momentum, nag, adam, adamax, rmsprop, adagrad, adadelta, rprop };

enum class DecayMode { none, coupled, decoupled };

/// Hyperparameters shared by the nine baseline algorithms. Each algorithm
/// reads only the fields it needs.
struct BaselineHyper {
  Algorithm algorithm = Algorithm::sgd;
  double gamma = 1e-3;
  double mu = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // RPROP
  double eta_minus = 0.5;
  double eta_plus = 1.2;
  double s_min = 1e-6;
  double s_max = 1e-3;
  double s0 = 1e-3;

  double weight_decay = 0.0;
  DecayMode decay_mode = DecayMode::none;
  bool maximize = false;

  /// Framework defaults for one algorithm (only the algorithm-specific
  /// fields differ from the member initializers).
  static BaselineHyper defaults_for(Algorithm a) {
    BaselineHyper h;
    h.algorithm = a;
    switch (a) {
      case Algorithm::rmsprop:
        h.beta2 = 0.99;
        break;
      case Algorithm::adagrad:
        h.epsilon = 1e-10;
        break;
      case Algorithm::adadelta:
        h.beta2 = 0.9;
        h.epsilon = 1e-6;
        break;
      case Algorithm::core:
        throw InvalidArgument("core is not a baseline algorithm");
      default:
        break;
    }
    return h;
  }

  void validate() const {
    if (algorithm == Algorithm::core) throw InvalidArgument("core is not a baseline algorithm");
    if (!(gamma > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (!(mu >= 0.0 && mu < 1.0)) throw InvalidArgument("momentum factor must lie in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw InvalidArgument("decay rates must lie in [0, 1)");
    if (!(eta_minus > 0.0 && eta_minus <= 1.0) || !(eta_plus >= 1.0))
      throw InvalidArgument("need 0 < eta_minus <= 1 <= eta_plus");
    if (!(s_min > 0.0 && s_min <= s_max)) throw InvalidArgument("need 0 < s_min <= s_max");
    if (!(weight_decay >= 0.0)) throw InvalidArgument("weight decay must be non-negative");
  }

  /// The step-size scale used by decoupled weight decay.
  [[nodiscard]] double learning_rate() const noexcept { return algorithm == Algorithm::rprop ? s_max : gamma; }
};

/// Accumulators for the baselines; unused vectors stay at zero.
struct BaselineState {
  std::vector<double> m;       // momentum / first moment
  std::vector<double> h;       // squared-gradient moving average
  std::vector<double> b;       // AdaGrad sum of squares
  std::vector<double> l;       // AdaDelta update accumulator
  std::vector<double> k;       // AdaMax infinity norm
  std::vector<double> G_prev;  // RPROP sign memory
  std::vector<double> s;       // RPROP step sizes
  std::int64_t tau = 0;

  BaselineState() = default;
  BaselineState(std::size_t n, double s0)
      : m(n, 0.0), h(n, 0.0), b(n, 0.0), l(n, 0.0), k(n, 0.0), G_prev(n, 0.0), s(n, s0) {}

  [[nodiscard]] std::size_t size() const noexcept { return m.size(); }
};

namespace detail {

inline void check_step_args(const BaselineState& st, std::span<const double> w, std::span<const double> grad) {
  if (w.size() != st.size() || grad.size() != st.size()) throw InvalidArgument("optimizer step: length mismatch");
  for (double x : grad)
    if (!std::isfinite(x)) throw NumericFailure("optimizer step: non-finite gradient");
}

/// Gradient after the maximization sign flip and coupled weight decay.
inline double effective_grad(const BaselineHyper& hp, double grad, double w) {
  double G = hp.maximize ? -grad : grad;
  if (hp.decay_mode == DecayMode::coupled) G += hp.weight_decay * w;
  return G;
}

inline double decoupled_decay(const BaselineHyper& hp, double w) {
  return hp.decay_mode == DecayMode::decoupled ? w - hp.weight_decay * hp.learning_rate() * w : w;
}

inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace detail

inline void sgd_step(BaselineState& st, std::span<double> w, std::span<const double> grad, const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double G = detail::effective_grad(hp, grad[i], w[i]);
    w[i] = detail::decoupled_decay(hp, w[i]) - hp.gamma * G;
  }
}

/// Heavy-ball momentum; the buffer starts as the first gradient.
inline void momentum_step(BaselineState& st, std::span<double> w, std::span<const double> grad,
                          const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double G = detail::effective_grad(hp, grad[i], w[i]);
    st.m[i] = st.tau == 1 ? G : hp.mu * st.m[i] + G;
    w[i] = detail::decoupled_decay(hp, w[i]) - hp.gamma * st.m[i];
  }
}

/// Nesterov momentum: applies mu * m + G with the freshly updated m.
inline void nag_step(BaselineState& st, std::span<double> w, std::span<const double> grad, const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double G = detail::effective_grad(hp, grad[i], w[i]);
    st.m[i] = st.tau == 1 ? G : hp.mu * st.m[i] + G;
    const double nesterov = hp.mu * st.m[i] + G;
    w[i] = detail::decoupled_decay(hp, w[i]) - hp.gamma * nesterov;
  }
}

inline void adam_step(BaselineState& st, std::span<double> w, std::span<const double> grad, const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  const double tau = static_cast<double>(st.tau);
  const double corr1 = 1.0 - std::pow(hp.beta1, tau);
  const double corr2 = 1.0 - std::pow(hp.beta2, tau);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double G = detail::effective_grad(hp, grad[i], w[i]);
    st.m[i] = hp.beta1 * st.m[i] + (1.0 - hp.beta1) * G;
    st.h[i] = hp.beta2 * st.h[i] + (1.0 - hp.beta2) * G * G;
    const double u = (st.m[i] / corr1) / (std::sqrt(st.h[i] / corr2) + hp.epsilon);
    w[i] = detail::decoupled_decay(hp, w[i]) - hp.gamma * u;
  }
}

/// Adam with the second-moment root replaced by a decaying infinity norm.
inline void adamax_step(BaselineState& st, std::span<double> w, std::span<const double> grad,
                        const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  const double corr1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.tau));
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double G = detail::effective_grad(hp, grad[i], w[i]);
    st.m[i] = hp.beta1 * st.m[i] + (1.0 - hp.beta1) * G;
    st.k[i] = std::max(hp.beta2 * st.k[i], std::abs(G + hp.epsilon));
    // k is 0 only if G == -epsilon on the very first step
    const double u = st.k[i] > 0.0 ? (st.m[i] / corr1) / st.k[i] : 0.0;
    w[i] = detail::decoupled_decay(hp, w[i]) - hp.gamma * u;
  }
}

inline void rmsprop_step(BaselineState& st, std::span<double> w, std::span<const double> grad,
                         const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double G = detail::effective_grad(hp, grad[i], w[i]);
    st.h[i] = hp.beta2 * st.h[i] + (1.0 - hp.beta2) * G * G;
    w[i] = detail::decoupled_decay(hp, w[i]) - hp.gamma * G / (std::sqrt(st.h[i]) + hp.epsilon);
  }
}

inline void adagrad_step(BaselineState& st, std::span<double> w, std::span<const double> grad,
                         const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double G = detail::effective_grad(hp, grad[i], w[i]);
    st.b[i] += G * G;
    w[i] = detail::decoupled_decay(hp, w[i]) - hp.gamma * G / (std::sqrt(st.b[i]) + hp.epsilon);
  }
}

/// AdaDelta. Both the step factor and the accumulator update use l from the
/// previous step; epsilon is added before the square root.
inline void adadelta_step(BaselineState& st, std::span<double> w, std::span<const double> grad,
                          const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double G = detail::effective_grad(hp, grad[i], w[i]);
    st.h[i] = hp.beta2 * st.h[i] + (1.0 - hp.beta2) * G * G;
    const double ratio = (st.l[i] + hp.epsilon) / (st.h[i] + hp.epsilon);
    w[i] = detail::decoupled_decay(hp, w[i]) - hp.gamma * G * std::sqrt(ratio);
    st.l[i] = hp.beta2 * st.l[i] + (1.0 - hp.beta2) * ratio * G * G;
  }
}

/// Sign-based RPROP with backtracking: on a sign reversal the step shrinks
/// and the stored gradient is zeroed, so the weight does not move this step
/// and the next sign product is neutral.
inline void rprop_step(BaselineState& st, std::span<double> w, std::span<const double> grad,
                       const BaselineHyper& hp) {
  detail::check_step_args(st, w, grad);
  st.tau += 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double G = detail::effective_grad(hp, grad[i], w[i]);
    const double product = st.G_prev[i] * G;
    if (product < 0.0) {
      st.s[i] = std::max(hp.eta_minus * st.s[i], hp.s_min);
      G = 0.0;
    } else if (product > 0.0) {
      st.s[i] = std::min(hp.eta_plus * st.s[i], hp.s_max);
    }
    w[i] = detail::decoupled_decay(hp, w[i]) - st.s[i] * detail::sgn(G);
    st.G_prev[i] = G;
  }
}

/// Dispatches to the step function of `hp.algorithm`.
inline void baseline_step(BaselineState& st, std::span<double> w, std::span<const double> grad,
                          const BaselineHyper& hp) {
  switch (hp.algorithm) {
    case Algorithm::sgd: return sgd_step(st, w, grad, hp);
    case Algorithm::momentum: return momentum_step(st, w, grad, hp);
    case Algorithm::nag: return nag_step(st, w, grad, hp);
    case Algorithm::adam: return adam_step(st, w, grad, hp);
    case Algorithm::adamax: return adamax_step(st, w, grad, hp);
    case Algorithm::rmsprop: return rmsprop_step(st, w, grad, hp);
    case Algorithm::adagrad: return adagrad_step(st, w, grad, hp);
    case Algorithm::adadelta: return adadelta_step(st, w, grad, hp);
    case Algorithm::rprop: return rprop_step(st, w, grad, hp);
    case Algorithm::core: break;
  }
  throw InvalidArgument("baseline_step: unsupported algorithm");
}

}  // namespace optbench
