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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "optbench/errors.hpp"
#include "optbench/model.hpp"
#include "optbench/numerics.hpp"
#include "optbench/optimizer.hpp"
#include "optbench/tasks.hpp"

namespace optbench {

/// Per-epoch test errors of one training run.
struct ErrorTrace {
  std::vector<double> test_errors;
  std::uint64_t params_checksum = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string failure;
};

/// What an observer sees around every optimizer step.
struct StepEvent {
  std::size_t epoch = 0;
  std::size_t step = 0;  // global step index, 0-based
  std::span<const double> weights_before;
  std::span<const double> weights_after;
  std::span<const double> grad;
  const Optimizer& optimizer;
};

using StepObserver = std::function<void(const StepEvent&)>;

/// FNV-1a over the bit patterns of the parameters.
inline std::uint64_t params_checksum(std::span<const double> v) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (double x : v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      hash ^= (bits >> (8 * b)) & 0xFF;
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

/// Trains `task` with `spec` from the weights drawn by `seed`, recording the
/// test error after each epoch. A NaN/Inf anywhere ends the run as failed;
/// the remaining epochs are recorded as NaN.
inline ErrorTrace run_training(const TaskInstance& task, const OptimizerSpec& spec, std::uint64_t seed,
                               const StepObserver& observer = {}) {
  const auto started = std::chrono::steady_clock::now();
  ErrorTrace trace;
  trace.seed = seed;
  trace.test_errors.reserve(task.epochs);
  ParamStore params;
  try {
    Prng init_rng(seed);
    params = task.initial_params(init_rng);
    Optimizer opt = make_optimizer(spec, params.layout());
    std::vector<double> grad(params.size());
    std::vector<double> before;
    std::size_t global_step = 0;

    auto apply = [&](std::size_t epoch) {
      if (observer) before.assign(params.values().begin(), params.values().end());
      opt.step(params.values(), grad);
      if (observer) observer(StepEvent{epoch, global_step, before, params.values(), grad, opt});
      ++global_step;
    };

    for (std::size_t epoch = 0; epoch < task.epochs; ++epoch) {
      if (task.supervised()) {
        const bool full = task.effective_batch_size() == task.train.size();
        const auto order = epoch_order(task, Prng(derive_seed(seed, epoch)));
        const auto size = task.effective_batch_size();
        for (std::size_t first = 0; first < order.size(); first += size) {
          const auto count = std::min(size, order.size() - first);
          auto lg = full ? loss_and_grad(task.model, params.values(), task.train)
                         : loss_and_grad(task.model, params.values(),
                                         gather_rows(task.train, std::span(order).subspan(first, count)));
          grad = std::move(lg.grad);
          apply(epoch);
        }
      } else {
        const double loss = task.analytic.evaluate(params.values(), grad);
        if (!std::isfinite(loss)) throw NumericFailure("non-finite objective value");
        apply(epoch);
      }
      for (double w : params.values())
        if (!std::isfinite(w)) throw NumericFailure("non-finite weight after update");
      const double err = evaluate_test_error(task, params);
      if (!std::isfinite(err)) throw NumericFailure("non-finite test error");
      trace.test_errors.push_back(err);
    }
  } catch (const std::exception& e) {
    trace.failed = true;
    trace.failure = e.what();
  }
  trace.test_errors.resize(task.epochs, std::numeric_limits<double>::quiet_NaN());
  trace.params_checksum = params_checksum(params.values());
  trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trace;
}

struct MinError {
  double value = 0.0;
  bool failed = false;
};

/// Early-stopping error: the smallest per-epoch test error, or `penalty`
/// (flagged) for a failed run.
inline MinError min_test_error(const ErrorTrace& trace, double penalty) {
  if (trace.failed || trace.test_errors.empty()) return {penalty, true};
  return {*std::min_element(trace.test_errors.begin(), trace.test_errors.end()), false};
}

enum class SelectBy { mean, std };

struct GridChoice {
  double lr = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

/// Picks the learning rate whose seeds have the lowest mean minimum error
/// (ties: lower std, then smaller lr). With SelectBy::std the roles of mean
/// and std are swapped.
inline GridChoice grid_select(const std::map<double, std::vector<double>>& results, SelectBy by = SelectBy::mean) {
  if (results.empty()) throw InvalidArgument("grid_select: no learning rates");
  std::optional<GridChoice> best;
  for (const auto& [lr, values] : results) {
    const auto ms = mean_std(values);
    const GridChoice c{lr, ms.mean, ms.std};
    if (!best) {
      best = c;
      continue;
    }
    const auto key = [by](const GridChoice& g) {
      return by == SelectBy::mean ? std::pair{g.mean, g.std} : std::pair{g.std, g.mean};
    };
    // map iteration is ascending in lr, so strict < keeps the smaller lr on ties
    if (key(c) < key(*best)) best = c;
  }
  return *best;
}

struct Score {
  double value = 0.0;
  double uncertainty = 0.0;
};

/// Relative accuracy per optimizer: A = min_k E / E_k and its propagated
/// uncertainty dA = min_k E / E_k^2 * dE_k.
inline std::map<std::string, Score> accuracy_scores(const std::map<std::string, MeanStd>& errors) {
  if (errors.empty()) throw InvalidArgument("accuracy_scores: no optimizers");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [name, e] : errors) {
    if (!(e.mean > 0.0) || !std::isfinite(e.mean))
      throw InvalidArgument("accuracy_scores: error of '" + name + "' must be positive and finite");
    best = std::min(best, e.mean);
  }
  std::map<std::string, Score> out;
  for (const auto& [name, e] : errors) out[name] = {best / e.mean, best / (e.mean * e.mean) * e.std};
  return out;
}

/// Mean accuracy over tasks with uncertainty sqrt(sum dA^2) / N.
inline Score overall_score(const std::map<std::string, Score>& per_task) {
  if (per_task.empty()) throw InvalidArgument("overall_score: no tasks");
  std::vector<double> a, da2;
  for (const auto& [_, s] : per_task) {
    a.push_back(s.value);
    da2.push_back(s.uncertainty * s.uncertainty);
  }
  const auto n = static_cast<double>(per_task.size());
  return {pairwise_sum(a) / n, std::sqrt(pairwise_sum(da2)) / n};
}

// Suite ----------------------------------------------------------------------

struct PenaltyPolicy {
  enum class Mode { relative, absolute };
  Mode mode = Mode::relative;
  /// relative: penalty = factor x worst finite minimum error on the task.
  double factor = 10.0;
  /// absolute value; also the fallback when a task has no finite run.
  double value = 1000.0;
};

struct TaskEntry {
  std::string name;
  TaskOverrides overrides;
  std::optional<std::vector<double>> lr_grid;
};

struct SuiteConfig {
  std::uint64_t master_seed = 1;
  std::size_t seeds = 20;
  std::vector<double> lr_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<TaskEntry> tasks;
  std::vector<OptimizerSpec> optimizers;
  PenaltyPolicy penalty;
  SelectBy select_by = SelectBy::mean;
  /// 0 picks the hardware thread count.
  std::size_t workers = 1;
  std::string output_dir = "opt-bench-out";

  [[nodiscard]] const std::vector<double>& grid_for(const TaskEntry& t) const {
    return t.lr_grid ? *t.lr_grid : lr_grid;
  }

  [[nodiscard]] std::size_t cell_count() const {
    std::size_t n = 0;
    for (const auto& t : tasks) n += grid_for(t).size() * optimizers.size() * seeds;
    return n;
  }

  void validate() const {
    if (seeds == 0) throw InvalidArgument("seeds: must be >= 1");
    if (tasks.empty()) throw InvalidArgument("tasks: at least one task is required");
    if (optimizers.empty()) throw InvalidArgument("optimizers: at least one optimizer is required");
    auto check_grid = [](const std::vector<double>& g, const std::string& where) {
      if (g.empty()) throw InvalidArgument(where + ": learning-rate grid is empty");
      for (double v : g)
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(where + ": grid values must be positive");
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j)
          if (g[i] == g[j]) throw InvalidArgument(where + ": duplicate grid value");
    };
    check_grid(lr_grid, "lr_grid");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      builtin_task_index(tasks[i].name);
      if (tasks[i].lr_grid) check_grid(*tasks[i].lr_grid, "tasks[" + std::to_string(i) + "].lr_grid");
      for (std::size_t j = 0; j < i; ++j)
        if (tasks[j].name == tasks[i].name) throw InvalidArgument("tasks: duplicate task '" + tasks[i].name + "'");
    }
    for (std::size_t i = 0; i < optimizers.size(); ++i) {
      const auto& o = optimizers[i];
      for (std::size_t j = 0; j < i; ++j)
        if (optimizers[j].label == o.label) throw InvalidArgument("optimizers: duplicate label '" + o.label + "'");
      for (const auto& t : tasks)
        for (double lr : grid_for(t)) with_learning_rate(o, lr).validate();
    }
    if (penalty.mode == PenaltyPolicy::Mode::relative ? !(penalty.factor > 0.0) : !(penalty.value > 0.0))
      throw InvalidArgument("penalty: value must be positive");
  }
};

/// Seed of the dataset for a task; independent of optimizer and grid value.
inline std::uint64_t task_data_seed(std::uint64_t master, std::string_view task) {
  return derive_seed(master, 1000 + builtin_task_index(task));
}

/// Seed of training run `seed_index` on a task. Every optimizer and grid
/// value sees the same set of seeds.
inline std::uint64_t run_seed(std::uint64_t master, std::string_view task, std::size_t seed_index) {
  return derive_seed(derive_seed(master, builtin_task_index(task)), seed_index);
}

struct CellResult {
  std::string task;
  std::string optimizer;
  double lr = 0.0;
  std::size_t seed_index = 0;
  ErrorTrace trace;
  MinError e_min;
};

struct GridRow {
  std::string task;
  std::string optimizer;
  double lr = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t failed_runs = 0;
};

struct SummaryRow {
  std::string task;
  std::string optimizer;
  double selected_lr = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t failed_runs = 0;
  Score accuracy;
};

struct OverallRow {
  std::string optimizer;
  Score score;
};

struct BenchmarkReport {
  std::vector<CellResult> cells;  // ordered by task, optimizer, lr, seed (config order)
  std::vector<GridRow> grid;
  std::vector<SummaryRow> summary;
  std::vector<OverallRow> overall;
  std::map<std::string, double> penalties;  // per task
  std::vector<std::string> warnings;
};

/// Observer invoked for every step of every cell; may run concurrently.
using CellObserver = std::function<void(const CellResult& cell, const StepEvent& event)>;

/// Regime-mismatch warning for a CoRe selection on a supervised task, if any.
inline std::optional<std::string> regime_warning(const TaskInstance& task, const OptimizerSpec& spec, double s_max) {
  if (spec.algorithm != Algorithm::core || !task.supervised()) return std::nullopt;
  const bool bad = (task.regime == Regime::mini_batch && s_max > 1e-2) || (task.regime == Regime::batch && s_max < 1e-1);
  if (!bad) return std::nullopt;
  return "regime-mismatch: " + spec.label + " selected s_max=" + std::to_string(s_max) + " on " +
         std::string(to_string(task.regime)) + " task '" + task.name + "'";
}

/// Aggregates finished cells into grid, summary and overall tables. A pure
/// function of the cells (order given by `config`).
inline void aggregate(const SuiteConfig& config, const std::vector<TaskInstance>& instances, BenchmarkReport& report) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t cursor = 0;
  std::map<std::string, std::map<std::string, Score>> per_optimizer;  // optimizer -> task -> score
  for (std::size_t ti = 0; ti < config.tasks.size(); ++ti) {
    const auto& entry = config.tasks[ti];
    const auto& grid = config.grid_for(entry);
    const std::size_t task_cells = grid.size() * config.optimizers.size() * config.seeds;
    auto cells = std::span(report.cells).subspan(cursor, task_cells);
    cursor += task_cells;

    double penalty = config.penalty.value;
    if (config.penalty.mode == PenaltyPolicy::Mode::relative) {
      double worst = -1.0;
      for (const auto& c : cells)
        if (!c.trace.failed) worst = std::max(worst, min_test_error(c.trace, nan).value);
      if (worst > 0.0) penalty = config.penalty.factor * worst;
    }
    report.penalties[entry.name] = penalty;

    std::map<std::string, MeanStd> selected;
    std::vector<SummaryRow> rows;
    std::size_t k = 0;
    for (const auto& opt : config.optimizers) {
      std::map<double, std::vector<double>> by_lr;
      std::map<double, std::size_t> failures;
      for (double lr : grid) {
        for (std::size_t s = 0; s < config.seeds; ++s, ++k) {
          auto& c = cells[k];
          c.e_min = min_test_error(c.trace, penalty);
          by_lr[lr].push_back(c.e_min.value);
          failures[lr] += c.e_min.failed ? 1 : 0;
        }
        const auto ms = mean_std(by_lr[lr]);
        report.grid.push_back({entry.name, opt.label, lr, ms.mean, ms.std, failures[lr]});
      }
      const auto choice = grid_select(by_lr, config.select_by);
      SummaryRow row{entry.name, opt.label, choice.lr, choice.mean, choice.std, failures[choice.lr], {}};
      rows.push_back(row);
      // errors must be positive for the ratio; exact zeros are floored
      selected[opt.label] = {std::max(choice.mean, 1e-12), choice.std, false};
      if (auto w = regime_warning(instances[ti], opt, choice.lr)) report.warnings.push_back(*w);
    }
    const auto scores = accuracy_scores(selected);
    for (auto& row : rows) {
      row.accuracy = scores.at(row.optimizer);
      per_optimizer[row.optimizer][entry.name] = row.accuracy;
      report.summary.push_back(row);
    }
  }
  for (const auto& opt : config.optimizers)
    report.overall.push_back({opt.label, overall_score(per_optimizer.at(opt.label))});
}

/// Runs every (task, optimizer, lr, seed) cell, in parallel when
/// `config.workers` allows, then aggregates. Output does not depend on the
/// worker count or execution order.
inline BenchmarkReport run_suite(const SuiteConfig& config, const CellObserver& observer = {}) {
  config.validate();
  std::vector<TaskInstance> instances;
  for (const auto& t : config.tasks)
    instances.push_back(make_builtin_task(t.name, task_data_seed(config.master_seed, t.name), t.overrides));

  struct Job {
    std::size_t task;
    std::size_t optimizer;
    double lr;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  BenchmarkReport report;
  for (std::size_t ti = 0; ti < config.tasks.size(); ++ti)
    for (std::size_t oi = 0; oi < config.optimizers.size(); ++oi)
      for (double lr : config.grid_for(config.tasks[ti]))
        for (std::size_t s = 0; s < config.seeds; ++s) {
          jobs.push_back({ti, oi, lr, s});
          CellResult cell;
          cell.task = config.tasks[ti].name;
          cell.optimizer = config.optimizers[oi].label;
          cell.lr = lr;
          cell.seed_index = s;
          report.cells.push_back(std::move(cell));
        }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      auto& cell = report.cells[i];
      const auto spec = with_learning_rate(config.optimizers[job.optimizer], job.lr);
      const auto seed = run_seed(config.master_seed, cell.task, job.seed_index);
      StepObserver step_observer;
      if (observer) step_observer = [&](const StepEvent& e) { observer(cell, e); };
      cell.trace = run_training(instances[job.task], spec, seed, step_observer);
    }
  };
  std::size_t workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
  workers = std::min(workers, std::max<std::size_t>(jobs.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  aggregate(config, instances, report);
  return report;
}

}  // namespace optbench
