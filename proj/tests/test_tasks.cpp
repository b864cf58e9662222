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

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "optbench/numerics.hpp"
#include "optbench/tasks.hpp"

using namespace optbench;

TEST(Rosenbrock, ValuesAndGradient) {
  const auto t = make_rosenbrock();
  EXPECT_NEAR(t.analytic.evaluate(std::vector{-1.2, 1.0}), 24.2, 1e-12);
  EXPECT_EQ(t.analytic.evaluate(std::vector{1.0, 1.0}), 0.0);
  std::vector<double> g(2);
  t.analytic.evaluate(std::vector{0.0, 0.0}, g);
  EXPECT_EQ(g, (std::vector{-2.0, 0.0}));
  t.analytic.evaluate(std::vector{1.0, 1.0}, g);
  EXPECT_EQ(g, (std::vector{0.0, 0.0}));
  Prng rng(1);
  EXPECT_EQ(t.analytic.initial_point(rng), (std::vector{-1.2, 1.0}));
  EXPECT_EQ(evaluate_test_error(t, std::vector{-1.2, 1.0}), t.analytic.evaluate(std::vector{-1.2, 1.0}));
}

TEST(Quadratic, MinimumAtCenterAndGradient) {
  Prng rng(4);
  const auto t = make_quadratic(10, rng);
  EXPECT_EQ(t.analytic.dim(), 10u);
  EXPECT_EQ(t.analytic.evaluate(t.analytic.center), 0.0);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_GE(t.analytic.coeff[i], 0.5);
    EXPECT_LE(t.analytic.coeff[i], 5.0);
  }
  auto w = t.analytic.center;
  w[3] += 0.5;
  std::vector<double> g(10);
  EXPECT_NEAR(t.analytic.evaluate(w, g), t.analytic.coeff[3] * 0.25, 1e-15);
  EXPECT_NEAR(g[3], t.analytic.coeff[3], 1e-15);
  EXPECT_THROW(t.analytic.evaluate(std::vector{1.0}), InvalidArgument);
  EXPECT_THROW(make_quadratic(0, rng), InvalidArgument);
}

TEST(SineRegression, ShapesAndZeroPredictorRmse) {
  Prng rng(9);
  const auto t = make_sine_regression(rng);
  EXPECT_EQ(t.train.size(), 100u);
  EXPECT_EQ(t.test.size(), 100u);
  EXPECT_EQ(t.regime, Regime::batch);
  for (std::size_t r = 0; r < t.train.size(); ++r) {
    EXPECT_GE(t.train.inputs(r, 0), -M_PI);
    EXPECT_LE(t.train.inputs(r, 0), M_PI);
  }
  // zero network: RMS of sin over [-pi, pi] is 1/sqrt(2)
  std::vector<double> zero(t.model.num_params(), 0.0);
  EXPECT_NEAR(evaluate_test_error(t, zero), std::sqrt(0.5), 0.1);
}

TEST(Batches, MiniBatchesPartitionTheEpoch) {
  Prng rng(2);
  const auto t = make_cluster_classification(rng);
  EXPECT_EQ(t.batches_per_epoch(), 64u);
  EXPECT_EQ(classify_regime(t.batch_size, t.train.size()), Regime::mini_batch);
  const Prng epoch_rng(123);
  const auto order = epoch_order(t, epoch_rng);
  EXPECT_EQ(std::set<std::size_t>(order.begin(), order.end()).size(), 512u);
  std::size_t rows = 0;
  for (std::size_t b = 0; b < t.batches_per_epoch(); ++b) {
    const auto batch = next_batch(t, epoch_rng, b);
    ASSERT_EQ(batch.size(), 8u);
    for (std::size_t r = 0; r < 8; ++r) {
      const auto src = order[b * 8 + r];
      EXPECT_EQ(batch.inputs(r, 0), t.train.inputs(src, 0));
      EXPECT_EQ(batch.labels[r], t.train.labels[src]);
    }
    rows += batch.size();
  }
  EXPECT_EQ(rows, 512u);
  EXPECT_THROW(next_batch(t, epoch_rng, 64), InvalidArgument);
  EXPECT_NE(epoch_order(t, Prng(124)), order);
}

TEST(Batches, ShortFinalBatchAndFullBatchIdentity) {
  Prng rng(2);
  auto t = make_intermediate_regression(rng);
  EXPECT_EQ(t.batches_per_epoch(), 10u);
  EXPECT_EQ(t.regime, Regime::intermediate);
  t.batch_size = 30;
  EXPECT_EQ(t.batches_per_epoch(), 7u);
  EXPECT_EQ(next_batch(t, Prng(1), 6).size(), 20u);
  Prng rng2(3);
  const auto full = make_sine_regression(rng2);
  const auto order = epoch_order(full, Prng(99));
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i);
}

TEST(Regime, Classification) {
  EXPECT_THROW(classify_regime(0, 100), InvalidArgument);
  EXPECT_THROW(classify_regime(101, 100), InvalidArgument);
  EXPECT_EQ(classify_regime(100, 100), Regime::batch);
  EXPECT_EQ(classify_regime(1, 1000), Regime::mini_batch);
  EXPECT_EQ(classify_regime(20, 200), Regime::intermediate);
  EXPECT_EQ(recommended_s_max(Regime::mini_batch), 1e-3);
  EXPECT_EQ(recommended_s_max(Regime::intermediate), 1e-2);
  EXPECT_EQ(recommended_s_max(Regime::batch), 1.0);
}

TEST(Cluster, BalancedLabelsAndChanceLevel) {
  Prng rng(5);
  const auto t = make_cluster_classification(rng);
  std::vector<std::size_t> counts(4, 0);
  for (auto l : t.train.labels) ++counts.at(l);
  for (auto c : counts) EXPECT_NEAR(double(c), 128.0, 40.0);
  // zero network ties every logit; argmax picks class 0
  std::vector<double> zero(t.model.num_params(), 0.0);
  EXPECT_NEAR(evaluate_test_error(t, zero), 0.75, 0.06);
}

TEST(Cluster, BayesErrorMonteCarlo) {
  // per-axis error Phi(-3) ~ 0.00135, two axes -> ~0.0027
  Prng data(7);
  const auto t = make_cluster_classification(data);
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < t.test.size(); ++r)
    wrong += cluster_bayes_class(t.test.inputs(r, 0), t.test.inputs(r, 1)) != t.test.labels[r];
  EXPECT_LE(double(wrong) / double(t.test.size()), 0.02);
  std::size_t total = 0, errs = 0;
  for (int rep = 0; rep < 40; ++rep) {
    Prng r(1000 + rep);
    const auto d = make_cluster_classification(r);
    for (std::size_t i = 0; i < d.train.size(); ++i, ++total)
      errs += cluster_bayes_class(d.train.inputs(i, 0), d.train.inputs(i, 1)) != d.train.labels[i];
  }
  EXPECT_NEAR(double(errs) / double(total), 0.0027, 0.0015);
}

TEST(Cluster, MisclassificationExtremes) {
  Prng rng(5);
  auto t = make_cluster_classification(rng);
  // weights zero, output bias favours class 2
  std::vector<double> p(t.model.num_params(), 0.0);
  const auto layout = t.layout();
  p[layout.back().offset + 2] = 1.0;
  for (auto& l : t.test.labels) l = 2;
  EXPECT_EQ(evaluate_test_error(t, p), 0.0);
  for (auto& l : t.test.labels) l = 1;
  EXPECT_EQ(evaluate_test_error(t, p), 1.0);
}

TEST(Registry, BuiltinsAreDeterministic) {
  EXPECT_EQ(kBuiltinTasks.size(), 5u);
  for (const auto& info : kBuiltinTasks) {
    const auto a = make_builtin_task(info.name, 42);
    const auto b = make_builtin_task(info.name, 42);
    EXPECT_EQ(a.regime, info.regime) << info.name;
    EXPECT_EQ(a.epochs, info.default_epochs);
    EXPECT_EQ(a.train.inputs.data, b.train.inputs.data);
    EXPECT_EQ(a.analytic.coeff, b.analytic.coeff);
  }
  EXPECT_EQ(make_builtin_task("quadratic", 1, {.epochs = 7, .dim = 3}).analytic.dim(), 3u);
  EXPECT_THROW(make_builtin_task("mnist", 1), InvalidArgument);
  EXPECT_THROW(make_builtin_task("rosenbrock", 1, {.dim = 3}), InvalidArgument);
  EXPECT_NE(make_builtin_task("sine_regression", 1).train.inputs.data,
            make_builtin_task("sine_regression", 2).train.inputs.data);
}

TEST(DatasetCsv, RegressionAndClassification) {
  Batch reg;
  reg.inputs = Matrix(2, 1);
  reg.targets = Matrix(2, 1);
  reg.inputs(0, 0) = 0.5;
  reg.inputs(1, 0) = -1.0;
  reg.targets(0, 0) = 0.25;
  reg.targets(1, 0) = 3.0;
  std::ostringstream os;
  write_dataset_csv(os, reg);
  EXPECT_EQ(os.str(), "x0,target\n0.5,0.25\n-1,3\n");

  Batch cls;
  cls.inputs = Matrix(1, 2);
  cls.inputs(0, 0) = 1.5;
  cls.inputs(0, 1) = -0.125;
  cls.labels = {3};
  std::ostringstream oc;
  write_dataset_csv(oc, cls);
  EXPECT_EQ(oc.str(), "x0,x1,target\n1.5,-0.125,3\n");
}
