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
#include <span>
#include <string>
#include <vector>

#include "optbench/errors.hpp"
#include "optbench/numerics.hpp"

namespace optbench {

/// Named contiguous slice of the flat parameter vector.
struct ParamGroup {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

using GroupLayout = std::vector<ParamGroup>;

/// Total length covered by a layout; throws if the groups are not contiguous
/// from zero.
inline std::size_t layout_size(const GroupLayout& layout) {
  std::size_t expected = 0;
  for (const auto& g : layout) {
    if (g.offset != expected) throw InvalidArgument("group '" + g.name + "' is not contiguous");
    expected += g.length;
  }
  return expected;
}

/// Flat weight vector plus the fixed group layout over it.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(std::vector<double> values, GroupLayout layout)
      : values_(std::move(values)), layout_(std::move(layout)) {
    if (layout_size(layout_) != values_.size())
      throw InvalidArgument("group layout does not cover the parameter vector");
  }

  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const GroupLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  [[nodiscard]] std::span<double> group(std::size_t i) {
    return std::span(values_).subspan(layout_.at(i).offset, layout_.at(i).length);
  }
  [[nodiscard]] std::span<const double> group(std::size_t i) const {
    return std::span(values_).subspan(layout_.at(i).offset, layout_.at(i).length);
  }

 private:
  std::vector<double> values_;
  GroupLayout layout_;
};

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return std::span(data).subspan(r * cols, cols);
  }
  [[nodiscard]] std::span<double> row(std::size_t r) { return std::span(data).subspan(r * cols, cols); }
};

/// Input rows with either regression targets or class labels.
struct Batch {
  Matrix inputs;
  Matrix targets;                  // regression
  std::vector<std::size_t> labels;  // classification

  [[nodiscard]] std::size_t size() const noexcept { return inputs.rows; }
  [[nodiscard]] bool is_classification() const noexcept { return !labels.empty(); }
};

enum class Activation { tanh, relu };
enum class OutputHead { linear, softmax };
enum class LossKind { mse, cross_entropy };

struct MlpSpec {
  std::vector<std::size_t> layer_sizes;
  Activation hidden_activation = Activation::tanh;
  OutputHead output_head = OutputHead::linear;
  LossKind loss_kind = LossKind::mse;

  void validate() const {
    if (layer_sizes.size() < 2) throw InvalidArgument("an MLP needs at least 2 layer sizes");
    for (auto n : layer_sizes)
      if (n == 0) throw InvalidArgument("layer sizes must be positive");
    if ((output_head == OutputHead::softmax) != (loss_kind == LossKind::cross_entropy))
      throw InvalidArgument("softmax head pairs only with cross_entropy, linear only with mse");
  }
  [[nodiscard]] std::size_t num_layers() const noexcept { return layer_sizes.size() - 1; }
  [[nodiscard]] std::size_t num_params() const noexcept {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
      n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
    return n;
  }
};

/// Layout W1, b1, W2, b2, ... Weight matrices are stored (out x in) row-major.
inline GroupLayout mlp_layout(const MlpSpec& spec) {
  GroupLayout layout;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto in = spec.layer_sizes[l];
    const auto out = spec.layer_sizes[l + 1];
    const auto tag = std::to_string(l + 1);
    layout.push_back({"W" + tag, offset, in * out});
    offset += in * out;
    layout.push_back({"b" + tag, offset, out});
    offset += out;
  }
  return layout;
}

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
inline ParamStore init_params(const MlpSpec& spec, Prng& rng) {
  spec.validate();
  auto layout = mlp_layout(spec);
  std::vector<double> values(layout_size(layout), 0.0);
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_sizes[l]));
    const auto& w = layout[2 * l];
    for (std::size_t i = 0; i < w.length; ++i) values[w.offset + i] = rng.uniform(-bound, bound);
  }
  return {std::move(values), std::move(layout)};
}

namespace detail {

inline void check_finite(std::span<const double> v, std::size_t layer) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericFailure("non-finite value in forward pass at layer " + std::to_string(layer),
                           static_cast<int>(layer));
}

/// Pre-activations and activations for every layer; acts[0] is the input.
struct ForwardCache {
  std::vector<Matrix> pre;
  std::vector<Matrix> acts;
};

inline void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = m.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (auto& x : row) {
      x = std::exp(x - mx);
      sum += x;
    }
    for (auto& x : row) x /= sum;
  }
}

inline ForwardCache forward_cached(const MlpSpec& spec, std::span<const double> params,
                                   const Matrix& inputs) {
  if (inputs.cols != spec.layer_sizes.front())
    throw InvalidArgument("input width " + std::to_string(inputs.cols) + " does not match layer size " +
                          std::to_string(spec.layer_sizes.front()));
  if (params.size() != spec.num_params()) throw InvalidArgument("parameter count does not match the spec");
  ForwardCache cache;
  cache.acts.push_back(inputs);
  std::size_t offset = 0;
  const std::size_t L = spec.num_layers();
  for (std::size_t l = 0; l < L; ++l) {
    const auto in = spec.layer_sizes[l];
    const auto out = spec.layer_sizes[l + 1];
    const double* w = params.data() + offset;
    const double* b = w + in * out;
    offset += in * out + out;
    const Matrix& x = cache.acts.back();
    Matrix z(x.rows, out);
    for (std::size_t r = 0; r < x.rows; ++r) {
      const double* xr = x.data.data() + r * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double* wo = w + o * in;
        double acc = b[o];
        for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xr[i];
        z(r, o) = acc;
      }
    }
    check_finite(z.data, l);
    Matrix a = z;
    if (l + 1 < L) {
      for (auto& v : a.data) v = spec.hidden_activation == Activation::tanh ? std::tanh(v) : (v > 0.0 ? v : 0.0);
    } else if (spec.output_head == OutputHead::softmax) {
      softmax_rows(a);
      check_finite(a.data, l);
    }
    cache.pre.push_back(std::move(z));
    cache.acts.push_back(std::move(a));
  }
  return cache;
}

inline void check_batch(const MlpSpec& spec, const Batch& batch) {
  if (batch.size() == 0) throw InvalidArgument("empty batch");
  if (spec.loss_kind == LossKind::cross_entropy) {
    if (batch.labels.size() != batch.size()) throw InvalidArgument("label count does not match input rows");
    for (auto k : batch.labels)
      if (k >= spec.layer_sizes.back()) throw InvalidArgument("class label out of range");
  } else {
    if (batch.targets.rows != batch.size()) throw InvalidArgument("target rows do not match input rows");
    if (batch.targets.cols != spec.layer_sizes.back()) throw InvalidArgument("target width does not match output size");
  }
}

inline double loss_from_output(const MlpSpec& spec, const Matrix& out, const Batch& batch) {
  std::vector<double> terms;
  if (spec.loss_kind == LossKind::mse) {
    terms.resize(out.data.size());
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      const double d = out.data[i] - batch.targets.data[i];
      terms[i] = d * d;
    }
    return pairwise_sum(terms) / static_cast<double>(out.data.size());
  }
  terms.resize(out.rows);
  for (std::size_t r = 0; r < out.rows; ++r) terms[r] = -std::log(out(r, batch.labels[r]));
  return pairwise_sum(terms) / static_cast<double>(out.rows);
}

}  // namespace detail

/// Network output for each input row.
inline Matrix forward(const MlpSpec& spec, const ParamStore& params, const Matrix& inputs) {
  spec.validate();
  return std::move(detail::forward_cached(spec, params.values(), inputs).acts.back());
}

/// Loss averaged over the batch (MSE also averages over output units).
inline double loss_value(const MlpSpec& spec, std::span<const double> params, const Batch& batch) {
  spec.validate();
  detail::check_batch(spec, batch);
  const auto cache = detail::forward_cached(spec, params, batch.inputs);
  return detail::loss_from_output(spec, cache.acts.back(), batch);
}

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Loss and its analytic gradient by backpropagation. The gradient follows
/// the same layout as the parameters.
inline LossAndGrad loss_and_grad(const MlpSpec& spec, std::span<const double> params, const Batch& batch) {
  spec.validate();
  detail::check_batch(spec, batch);
  const auto cache = detail::forward_cached(spec, params, batch.inputs);
  const Matrix& out = cache.acts.back();
  const std::size_t n = batch.size();
  const std::size_t L = spec.num_layers();

  LossAndGrad result;
  result.loss = detail::loss_from_output(spec, out, batch);
  if (!std::isfinite(result.loss))
    throw NumericFailure("non-finite loss", static_cast<int>(L - 1));
  result.grad.assign(params.size(), 0.0);

  // dL/dz for the output layer
  Matrix delta(out.rows, out.cols);
  if (spec.loss_kind == LossKind::mse) {
    const double scale = 2.0 / static_cast<double>(out.data.size());
    for (std::size_t i = 0; i < out.data.size(); ++i) delta.data[i] = scale * (out.data[i] - batch.targets.data[i]);
  } else {
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < out.cols; ++c)
        delta(r, c) = scale * (out(r, c) - (c == batch.labels[r] ? 1.0 : 0.0));
  }

  std::vector<std::size_t> offsets(L);
  for (std::size_t l = 0, off = 0; l < L; ++l) {
    offsets[l] = off;
    off += spec.layer_sizes[l] * spec.layer_sizes[l + 1] + spec.layer_sizes[l + 1];
  }

  for (std::size_t l = L; l-- > 0;) {
    const auto in = spec.layer_sizes[l];
    const auto outn = spec.layer_sizes[l + 1];
    const Matrix& x = cache.acts[l];
    double* gw = result.grad.data() + offsets[l];
    double* gb = gw + in * outn;
    for (std::size_t r = 0; r < n; ++r) {
      const double* xr = x.data.data() + r * in;
      for (std::size_t o = 0; o < outn; ++o) {
        const double d = delta(r, o);
        gb[o] += d;
        double* gwo = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) gwo[i] += d * xr[i];
      }
    }
    if (l == 0) break;
    const double* w = params.data() + offsets[l];
    Matrix prev(n, in);
    const Matrix& zprev = cache.pre[l - 1];
    const Matrix& aprev = cache.acts[l];
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < in; ++i) {
        double acc = 0.0;
        for (std::size_t o = 0; o < outn; ++o) acc += delta(r, o) * w[o * in + i];
        const double deriv = spec.hidden_activation == Activation::tanh
                                 ? 1.0 - aprev(r, i) * aprev(r, i)
                                 : (zprev(r, i) > 0.0 ? 1.0 : 0.0);
        prev(r, i) = acc * deriv;
      }
    }
    delta = std::move(prev);
  }
  return result;
}

inline LossAndGrad loss_and_grad(const MlpSpec& spec, const ParamStore& params, const Batch& batch) {
  return loss_and_grad(spec, params.values(), batch);
}

/// Central finite differences (L(w+h e_i) - L(w-h e_i)) / 2h. Works on a copy;
/// `params` is never modified.
inline std::vector<double> finite_diff_grad(const MlpSpec& spec, const ParamStore& params, const Batch& batch,
                                            double h = 1e-6) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  std::vector<double> w(params.values().begin(), params.values().end());
  std::vector<double> grad(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double saved = w[i];
    w[i] = saved + h;
    const double up = loss_value(spec, w, batch);
    w[i] = saved - h;
    const double down = loss_value(spec, w, batch);
    w[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Largest |a - b| / max(1e-8, |a| + |b|) over coordinates, with its index.
struct GradDeviation {
  double max_rel = 0.0;  // ||a - n||_2 / (||a||_2 + ||n||_2)
  double max_abs = 0.0;  // largest single-coordinate |a_i - n_i|
  std::size_t worst_index = 0;
};

/// Vector-wise relative deviation plus the worst coordinate. A per-coordinate
/// ratio is not used: the central difference carries an absolute error of
/// roughly eps * |L| / h, which dominates components that are nearly zero.
inline GradDeviation max_relative_deviation(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) throw InvalidArgument("gradient length mismatch");
  GradDeviation d;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double e = analytic[i] - numeric[i];
    diff2 += e * e;
    a2 += analytic[i] * analytic[i];
    n2 += numeric[i] * numeric[i];
    if (std::abs(e) > d.max_abs) {
      d.max_abs = std::abs(e);
      d.worst_index = i;
    }
  }
  const double scale = std::sqrt(a2) + std::sqrt(n2);
  d.max_rel = scale > 0.0 ? std::sqrt(diff2) / scale : std::sqrt(diff2);
  return d;
}

}  // namespace optbench
