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
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "optbench/errors.hpp"
#include "optbench/model.hpp"
#include "optbench/numerics.hpp"

namespace optbench {

enum class TaskKind { analytic, supervised };
enum class Regime { mini_batch, intermediate, batch };
enum class ErrorMetric { loss_value, rmse, misclassification_rate };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::mini_batch: return "mini_batch";
    case Regime::intermediate: return "intermediate";
    case Regime::batch: return "batch";
  }
  return "batch";
}

inline std::string_view to_string(ErrorMetric m) {
  switch (m) {
    case ErrorMetric::loss_value: return "loss_value";
    case ErrorMetric::rmse: return "rmse";
    case ErrorMetric::misclassification_rate: return "misclassification_rate";
  }
  return "loss_value";
}

/// Maximal CoRe step size recommended for a batch regime.
constexpr double recommended_s_max(Regime r) noexcept {
  switch (r) {
    case Regime::mini_batch: return 1e-3;
    case Regime::intermediate: return 1e-2;
    case Regime::batch: return 1.0;
  }
  return 1.0;
}

/// Regime from the fraction of the training set seen per gradient: the full
/// set is batch learning, below 2.5% is mini-batch, anything else is
/// intermediate.
inline Regime classify_regime(std::size_t batch_size, std::size_t train_size) {
  if (train_size == 0 || batch_size == 0 || batch_size > train_size)
    throw InvalidArgument("batch size must lie in [1, train size]");
  if (batch_size == train_size) return Regime::batch;
  const double fraction = static_cast<double>(batch_size) / static_cast<double>(train_size);
  return fraction < 0.025 ? Regime::mini_batch : Regime::intermediate;
}

/// Closed-form objective for the analytic tasks.
struct AnalyticObjective {
  enum class Shape { quadratic, rosenbrock };
  Shape shape = Shape::quadratic;
  std::vector<double> coeff;   // quadratic curvatures c_i
  std::vector<double> center;  // quadratic minimizer a_i
  std::vector<double> start;   // fixed start point; random in [-1, 1] if empty

  [[nodiscard]] std::size_t dim() const noexcept { return shape == Shape::rosenbrock ? 2 : coeff.size(); }

  /// Objective value; writes the gradient when `grad` is non-empty.
  double evaluate(std::span<const double> w, std::span<double> grad = {}) const {
    if (w.size() != dim()) throw InvalidArgument("analytic objective: dimension mismatch");
    if (shape == Shape::rosenbrock) {
      const double a = 1.0 - w[0];
      const double b = w[1] - w[0] * w[0];
      if (!grad.empty()) {
        grad[0] = -2.0 * a - 400.0 * w[0] * b;
        grad[1] = 200.0 * b;
      }
      return a * a + 100.0 * b * b;
    }
    std::vector<double> terms(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = w[i] - center[i];
      terms[i] = coeff[i] * d * d;
      if (!grad.empty()) grad[i] = 2.0 * coeff[i] * d;
    }
    return pairwise_sum(terms);
  }

  std::vector<double> initial_point(Prng& rng) const {
    if (!start.empty()) return start;
    std::vector<double> w(dim());
    for (auto& x : w) x = rng.uniform(-1.0, 1.0);
    return w;
  }
};

/// One benchmark problem: either an analytic objective or a supervised
/// dataset with a model. Immutable once built.
struct TaskInstance {
  std::string name;
  TaskKind kind = TaskKind::analytic;
  Regime regime = Regime::batch;
  ErrorMetric metric = ErrorMetric::loss_value;
  std::size_t epochs = 1;
  /// 0 means the full training set.
  std::size_t batch_size = 0;

  AnalyticObjective analytic;
  MlpSpec model;
  Batch train;
  Batch test;

  [[nodiscard]] bool supervised() const noexcept { return kind == TaskKind::supervised; }
  [[nodiscard]] std::size_t effective_batch_size() const noexcept {
    return batch_size == 0 ? train.size() : batch_size;
  }
  [[nodiscard]] std::size_t batches_per_epoch() const noexcept {
    if (!supervised()) return 1;
    const auto b = effective_batch_size();
    return (train.size() + b - 1) / b;
  }
  [[nodiscard]] double batch_fraction() const noexcept {
    return supervised() ? static_cast<double>(effective_batch_size()) / static_cast<double>(train.size()) : 1.0;
  }

  [[nodiscard]] GroupLayout layout() const {
    if (supervised()) return mlp_layout(model);
    return {{"w", 0, analytic.dim()}};
  }

  ParamStore initial_params(Prng& rng) const {
    if (supervised()) return init_params(model, rng);
    return {analytic.initial_point(rng), layout()};
  }

  void validate() const {
    if (epochs == 0) throw InvalidArgument("task '" + name + "': epochs must be positive");
    if (!supervised()) return;
    model.validate();
    if (train.size() == 0 || test.size() == 0) throw InvalidArgument("task '" + name + "': empty dataset");
    if (classify_regime(effective_batch_size(), train.size()) != regime)
      throw InvalidArgument("task '" + name + "': regime tag does not match batch fraction");
  }
};

namespace detail {

inline Batch sine_batch(Prng& rng, std::size_t n, double noise_sigma) {
  Batch b;
  b.inputs = Matrix(n, 1);
  b.targets = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(-std::numbers::pi, std::numbers::pi);
    b.inputs(i, 0) = x;
    b.targets(i, 0) = std::sin(x) + (noise_sigma > 0.0 ? noise_sigma * rng.normal() : 0.0);
  }
  return b;
}

inline constexpr std::array<std::array<double, 2>, 4> kClusterMeans{{{1.5, 1.5}, {-1.5, 1.5}, {-1.5, -1.5}, {1.5, -1.5}}};
inline constexpr double kClusterSigma = 0.5;

inline Batch cluster_batch(Prng& rng, std::size_t n) {
  Batch b;
  b.inputs = Matrix(n, 2);
  b.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = rng.index(kClusterMeans.size());
    b.labels[i] = k;
    b.inputs(i, 0) = kClusterMeans[k][0] + kClusterSigma * rng.normal();
    b.inputs(i, 1) = kClusterMeans[k][1] + kClusterSigma * rng.normal();
  }
  return b;
}

}  // namespace detail

/// Separable quadratic sum c_i (w_i - a_i)^2 with c_i in [0.5, 5] and
/// a_i in [-1, 1]; minimum 0 at w = a.
inline TaskInstance make_quadratic(std::size_t dim, Prng& rng, std::size_t epochs = 500) {
  if (dim == 0) throw InvalidArgument("quadratic dimension must be >= 1");
  TaskInstance t;
  t.name = "quadratic";
  t.kind = TaskKind::analytic;
  t.regime = Regime::batch;
  t.metric = ErrorMetric::loss_value;
  t.epochs = epochs;
  t.analytic.shape = AnalyticObjective::Shape::quadratic;
  t.analytic.coeff.resize(dim);
  t.analytic.center.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    t.analytic.coeff[i] = rng.uniform(0.5, 5.0);
    t.analytic.center[i] = rng.uniform(-1.0, 1.0);
  }
  return t;
}

/// (1 - x)^2 + 100 (y - x^2)^2 from the classic start (-1.2, 1).
inline TaskInstance make_rosenbrock(std::size_t epochs = 500) {
  TaskInstance t;
  t.name = "rosenbrock";
  t.kind = TaskKind::analytic;
  t.regime = Regime::batch;
  t.metric = ErrorMetric::loss_value;
  t.epochs = epochs;
  t.analytic.shape = AnalyticObjective::Shape::rosenbrock;
  t.analytic.start = {-1.2, 1.0};
  return t;
}

/// sin(x) on [-pi, pi], 100 train / 100 test points, full-batch training of a
/// [1, 16, 16, 1] tanh network.
inline TaskInstance make_sine_regression(Prng& rng, double noise_sigma = 0.02, std::size_t epochs = 2000) {
  TaskInstance t;
  t.name = "sine_regression";
  t.kind = TaskKind::supervised;
  t.regime = Regime::batch;
  t.metric = ErrorMetric::rmse;
  t.epochs = epochs;
  t.batch_size = 0;
  t.model = {{1, 16, 16, 1}, Activation::tanh, OutputHead::linear, LossKind::mse};
  t.train = detail::sine_batch(rng, 100, noise_sigma);
  t.test = detail::sine_batch(rng, 100, noise_sigma);
  return t;
}

/// Four Gaussian blobs at (+-1.5, +-1.5), sigma 0.5; batches of 8 out of 512.
inline TaskInstance make_cluster_classification(Prng& rng, std::size_t epochs = 50) {
  TaskInstance t;
  t.name = "cluster_classification";
  t.kind = TaskKind::supervised;
  t.regime = Regime::mini_batch;
  t.metric = ErrorMetric::misclassification_rate;
  t.epochs = epochs;
  t.batch_size = 8;
  t.model = {{2, 32, 4}, Activation::relu, OutputHead::softmax, LossKind::cross_entropy};
  t.train = detail::cluster_batch(rng, 512);
  t.test = detail::cluster_batch(rng, 512);
  return t;
}

/// Sine regression with 200 training points seen in batches of 20.
inline TaskInstance make_intermediate_regression(Prng& rng, double noise_sigma = 0.02, std::size_t epochs = 300) {
  TaskInstance t;
  t.name = "intermediate_regression";
  t.kind = TaskKind::supervised;
  t.regime = Regime::intermediate;
  t.metric = ErrorMetric::rmse;
  t.epochs = epochs;
  t.batch_size = 20;
  t.model = {{1, 16, 16, 1}, Activation::tanh, OutputHead::linear, LossKind::mse};
  t.train = detail::sine_batch(rng, 200, noise_sigma);
  t.test = detail::sine_batch(rng, 200, noise_sigma);
  return t;
}

/// Class with the highest true density for the cluster task (the Bayes
/// classifier; equal priors and isotropic covariance).
inline std::size_t cluster_bayes_class(double x, double y) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t k = 0; k < detail::kClusterMeans.size(); ++k) {
    const double dx = x - detail::kClusterMeans[k][0];
    const double dy = y - detail::kClusterMeans[k][1];
    const double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

/// Training-row order for one epoch: identity for full batches, a
/// Fisher-Yates shuffle driven by `epoch_rng` otherwise.
inline std::vector<std::size_t> epoch_order(const TaskInstance& task, Prng epoch_rng) {
  std::vector<std::size_t> order(task.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (task.effective_batch_size() == task.train.size()) return order;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[epoch_rng.index(i)]);
  return order;
}

/// Copies the listed rows of `source` into a new batch.
inline Batch gather_rows(const Batch& source, std::span<const std::size_t> rows) {
  Batch b;
  b.inputs = Matrix(rows.size(), source.inputs.cols);
  if (source.is_classification()) {
    b.labels.resize(rows.size());
  } else {
    b.targets = Matrix(rows.size(), source.targets.cols);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(source.inputs.row(rows[r]).begin(), source.inputs.cols, b.inputs.row(r).begin());
    if (source.is_classification()) {
      b.labels[r] = source.labels[rows[r]];
    } else {
      std::copy_n(source.targets.row(rows[r]).begin(), source.targets.cols, b.targets.row(r).begin());
    }
  }
  return b;
}

/// Batch number `position` of the epoch shuffled by `epoch_rng`. The final
/// batch of an epoch may be short.
inline Batch next_batch(const TaskInstance& task, Prng epoch_rng, std::size_t position) {
  if (!task.supervised()) throw InvalidArgument("next_batch: task '" + task.name + "' has no dataset");
  if (position >= task.batches_per_epoch()) throw InvalidArgument("next_batch: position past end of epoch");
  const auto order = epoch_order(task, epoch_rng);
  const auto size = task.effective_batch_size();
  const auto first = position * size;
  const auto count = std::min(size, order.size() - first);
  return gather_rows(task.train, std::span(order).subspan(first, count));
}

/// Test-set error: loss for analytic tasks, RMSE or misclassification rate
/// over the full test set otherwise.
inline double evaluate_test_error(const TaskInstance& task, std::span<const double> params) {
  if (!task.supervised()) return task.analytic.evaluate(params);
  const auto out = detail::forward_cached(task.model, params, task.test.inputs).acts.back();
  if (task.metric == ErrorMetric::misclassification_rate) {
    std::vector<double> wrong(out.rows);
    for (std::size_t r = 0; r < out.rows; ++r) {
      const auto row = out.row(r);
      const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      wrong[r] = pred == task.test.labels[r] ? 0.0 : 1.0;
    }
    return pairwise_sum(wrong) / static_cast<double>(out.rows);
  }
  std::vector<double> sq(out.data.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double d = out.data[i] - task.test.targets.data[i];
    sq[i] = d * d;
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
}

inline double evaluate_test_error(const TaskInstance& task, const ParamStore& params) {
  return evaluate_test_error(task, params.values());
}

/// CSV dump of a dataset: x0..x{n-1} then target column(s). Classification
/// sets write the label as the single target.
inline void write_dataset_csv(std::ostream& os, const Batch& data) {
  const auto width = data.inputs.cols;
  for (std::size_t c = 0; c < width; ++c) os << 'x' << c << ',';
  if (data.is_classification() || data.targets.cols == 1) {
    os << "target\n";
  } else {
    for (std::size_t c = 0; c < data.targets.cols; ++c) os << "target" << c << (c + 1 < data.targets.cols ? "," : "\n");
  }
  std::array<char, 32> buf{};
  auto put = [&](double v) {
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    os.write(buf.data(), end - buf.data());
  };
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      put(data.inputs(r, c));
      os << ',';
    }
    if (data.is_classification()) {
      os << data.labels[r];
    } else {
      for (std::size_t c = 0; c < data.targets.cols; ++c) {
        put(data.targets(r, c));
        if (c + 1 < data.targets.cols) os << ',';
      }
    }
    os << '\n';
  }
}

// Built-in task registry -----------------------------------------------------

struct TaskOverrides {
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> dim;  // quadratic only
};

struct TaskInfo {
  std::string_view name;
  Regime regime;
  std::size_t default_epochs;
  std::string_view description;
};

inline constexpr std::array<TaskInfo, 5> kBuiltinTasks{{
    {"quadratic", Regime::batch, 500, "separable quadratic, dim 10, loss value"},
    {"rosenbrock", Regime::batch, 500, "2-D Rosenbrock valley from (-1.2, 1), loss value"},
    {"sine_regression", Regime::batch, 2000, "sin(x), [1,16,16,1] tanh MLP, full batch, test RMSE"},
    {"cluster_classification", Regime::mini_batch, 50, "4 Gaussian blobs, [2,32,4] relu/softmax, batch 8/512, test error rate"},
    {"intermediate_regression", Regime::intermediate, 300, "sin(x), 200 points in batches of 20, test RMSE"},
}};

inline std::size_t builtin_task_index(std::string_view name) {
  for (std::size_t i = 0; i < kBuiltinTasks.size(); ++i)
    if (kBuiltinTasks[i].name == name) return i;
  throw InvalidArgument("unknown task '" + std::string(name) + "'");
}

/// Builds a registered task; the dataset is a pure function of `data_seed`.
inline TaskInstance make_builtin_task(std::string_view name, std::uint64_t data_seed, const TaskOverrides& ov = {}) {
  const auto idx = builtin_task_index(name);
  const auto epochs = ov.epochs.value_or(kBuiltinTasks[idx].default_epochs);
  if (ov.dim && name != "quadratic") throw InvalidArgument("'dim' applies only to the quadratic task");
  Prng rng(data_seed);
  TaskInstance t;
  switch (idx) {
    case 0: t = make_quadratic(ov.dim.value_or(10), rng, epochs); break;
    case 1: t = make_rosenbrock(epochs); break;
    case 2: t = make_sine_regression(rng, 0.02, epochs); break;
    case 3: t = make_cluster_classification(rng, epochs); break;
    default: t = make_intermediate_regression(rng, 0.02, epochs); break;
  }
  t.validate();
  return t;
}

}  // namespace optbench
