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

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "cli_util.hpp"

namespace fs = std::filesystem;
using testutil::run_command;

namespace {

const std::string kCli = OPTBENCH_CLI;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("optbench_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kTinyConfig = R"({
  "seeds": 2,
  "lr_grid": [0.01, 0.1],
  "tasks": [{"name": "quadratic", "epochs": 10, "dim": 3}],
  "optimizers": ["sgd", "core"]
})";

}  // namespace

TEST(Cli, ListShowsAlgorithmsTasksAndGuidance) {
  const auto r = run_command(kCli + " list");
  ASSERT_EQ(r.status, 0) << r.text;
  for (const char* name : {"core", "sgd", "momentum", "nag", "adam", "adamax", "rmsprop", "adagrad", "adadelta",
                           "rprop", "quadratic", "rosenbrock", "sine_regression", "cluster_classification",
                           "intermediate_regression"})
    EXPECT_NE(r.text.find(name), std::string::npos) << name;
  EXPECT_NE(r.text.find("mini-batch"), std::string::npos);
  EXPECT_NE(r.text.find("batch learning"), std::string::npos);
}

TEST(Cli, GradcheckPassesAndNegativeControlFails) {
  auto ok = run_command(kCli + " gradcheck --layers 2,4,3 --activation tanh --draws 5");
  EXPECT_EQ(ok.status, 0) << ok.text;
  auto ce = run_command(kCli + " gradcheck --layers 3,5,4 --activation relu --loss cross_entropy --draws 5");
  EXPECT_EQ(ce.status, 0) << ce.text;
  auto bad = run_command(kCli + " gradcheck --layers 2,4,3 --draws 5 --corrupt-gradient");
  EXPECT_EQ(bad.status, 1) << bad.text;
  EXPECT_EQ(run_command(kCli + " gradcheck --layers 2,x").status, 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto dir = scratch("errors");
  auto r = run_command(kCli + " run --config " + (dir / "missing.json").string());
  EXPECT_EQ(r.status, 2) << r.text;
  write_file(dir / "bad.json", R"({"tasks": ["quadratic"], "optimizers": [{"algorithm": "adam", "lr": 1}]})");
  r = run_command(kCli + " run --config " + (dir / "bad.json").string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.text.find("config.optimizers[0].lr"), std::string::npos) << r.text;
  write_file(dir / "broken.json", "{not json");
  EXPECT_EQ(run_command(kCli + " run --config " + (dir / "broken.json").string()).status, 2);
  EXPECT_EQ(run_command(kCli + " frobnicate").status, 2);
}

TEST(Cli, DryRunCountsCells) {
  const auto dir = scratch("dry");
  write_file(dir / "c.json", kTinyConfig);
  const auto r = run_command(kCli + " run --dry-run --config " + (dir / "c.json").string());
  EXPECT_EQ(r.status, 0) << r.text;
  EXPECT_NE(r.text.find("cells: 8"), std::string::npos) << r.text;
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, RunWritesReportAndHonoursOutputPrecedence) {
  const auto dir = scratch("run");
  write_file(dir / "c.json", kTinyConfig);
  const auto env_out = dir / "from_env";
  const auto flag_out = dir / "from_flag";
  auto r = run_command("OPT_BENCH_OUT=" + env_out.string() + " " + kCli + " run --config " + (dir / "c.json").string());
  ASSERT_EQ(r.status, 0) << r.text;
  for (const char* f : {"traces.csv", "summary.csv", "overall.csv", "summary.json"})
    EXPECT_TRUE(fs::exists(env_out / f)) << f;
  r = run_command("OPT_BENCH_OUT=" + env_out.string() + " " + kCli + " run --workers 2 --out " + flag_out.string() +
                  " --config " + (dir / "c.json").string());
  ASSERT_EQ(r.status, 0) << r.text;
  EXPECT_TRUE(fs::exists(flag_out / "summary.csv"));
  fs::remove_all(dir);
}

TEST(Cli, UnwritableOutputExitsThree) {
  const auto dir = scratch("io");
  write_file(dir / "c.json", kTinyConfig);
  write_file(dir / "blocker", "x");
  const auto r = run_command(kCli + " run --out " + (dir / "blocker" / "sub").string() + " --config " +
                             (dir / "c.json").string());
  EXPECT_EQ(r.status, 3) << r.text;
}
