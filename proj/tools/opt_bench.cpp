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

// opt-bench: command-line driver for the optimizer benchmark.
//
// Exit codes:
//   0  success
//   1  gradient check failed
//   2  invalid configuration or command line
//   3  I/O error while writing the report

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optbench/optbench.hpp"

namespace {

using namespace optbench;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

int cmd_run(const std::string& config_path, bool dry_run, std::optional<std::size_t> workers,
            std::optional<std::string> out_dir) {
  SuiteConfig config;
  try {
    config = load_suite_config(config_path);
  } catch (const InvalidArgument& e) {
    std::cerr << "opt-bench: " << e.what() << '\n';
    return kExitConfig;
  }
  if (workers) config.workers = *workers;
  if (out_dir) {
    config.output_dir = *out_dir;
  } else if (const char* env = std::getenv("OPT_BENCH_OUT"); env && *env) {
    config.output_dir = env;
  }

  if (dry_run) {
    std::cout << "cells: " << config.cell_count() << '\n';
    return kExitOk;
  }

  const auto report = run_suite(config);
  try {
    for (const auto& p : write_report(config.output_dir, report, config)) std::cout << "wrote " << p.string() << '\n';
  } catch (const IoError& e) {
    std::cerr << "opt-bench: " << e.what() << '\n';
    return kExitIo;
  }

  std::cout << '\n' << std::left << std::setw(16) << "optimizer" << std::setw(12) << "A_bar" << "dA_bar\n";
  // the CSVs keep full precision; the console table is rounded
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& row : report.overall)
    std::cout << std::setw(16) << row.optimizer << std::setw(12) << row.score.value << row.score.uncertainty << '\n';
  for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
  return kExitOk;
}

int cmd_gradcheck(const std::vector<std::size_t>& layers, const std::string& activation, const std::string& loss,
                  std::size_t draws, bool corrupt) {
  MlpSpec spec;
  spec.layer_sizes = layers;
  if (activation == "tanh") {
    spec.hidden_activation = Activation::tanh;
  } else if (activation == "relu") {
    spec.hidden_activation = Activation::relu;
  } else {
    std::cerr << "opt-bench: unknown activation '" << activation << "'\n";
    return kExitConfig;
  }
  if (loss == "mse") {
    spec.loss_kind = LossKind::mse;
    spec.output_head = OutputHead::linear;
  } else if (loss == "cross_entropy" || loss == "xent") {
    spec.loss_kind = LossKind::cross_entropy;
    spec.output_head = OutputHead::softmax;
  } else {
    std::cerr << "opt-bench: unknown loss '" << loss << "'\n";
    return kExitConfig;
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    std::cerr << "opt-bench: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto r = run_gradcheck(spec, draws, 1, 1e-6, corrupt);
  std::cout << "draws: " << r.draws << "\nmax relative deviation: " << format_number(r.max_rel)
            << "\nmax coordinate deviation: " << format_number(r.max_abs) << '\n';
  if (r.max_rel < 1e-6) {
    std::cout << "gradient check passed\n";
    return kExitOk;
  }
  std::cout << "gradient check FAILED: worst coordinate " << r.worst_index << " in draw " << r.worst_draw << '\n';
  return kExitCheckFailed;
}

void print_core_defaults(std::ostream& os) {
  const CoreHyper h;
  os << "  core      beta1_a=" << h.beta1_a << " beta1_b=" << h.beta1_b << " beta1_c=" << h.beta1_c
     << " beta2=" << h.beta2 << " epsilon=" << h.epsilon << " eta_minus=" << h.eta_minus
     << " eta_plus=" << h.eta_plus << " s_min=" << h.s_min << " s0=" << h.s0 << " d=" << h.d
     << " t_hist=" << h.t_hist << " p_frozen=" << h.p_frozen << '\n';
  os << "            s_max guidance: " << recommended_s_max(Regime::mini_batch) << " for mini-batch learning, "
     << recommended_s_max(Regime::intermediate) << " for intermediate cases, " << recommended_s_max(Regime::batch)
     << " for batch learning\n";
}

int cmd_list() {
  std::cout << "algorithms (grid value = learning rate gamma; s_max for core and rprop):\n";
  for (const auto& [alg, name] : kAlgorithms) {
    if (alg == Algorithm::core) {
      print_core_defaults(std::cout);
      continue;
    }
    const auto h = BaselineHyper::defaults_for(alg);
    std::cout << "  " << std::left << std::setw(10) << name;
    switch (alg) {
      case Algorithm::sgd: break;
      case Algorithm::momentum:
      case Algorithm::nag: std::cout << "mu=" << h.mu; break;
      case Algorithm::adam:
      case Algorithm::adamax:
        std::cout << "beta1=" << h.beta1 << " beta2=" << h.beta2 << " epsilon=" << h.epsilon;
        break;
      case Algorithm::rmsprop:
      case Algorithm::adadelta: std::cout << "beta2=" << h.beta2 << " epsilon=" << h.epsilon; break;
      case Algorithm::adagrad: std::cout << "epsilon=" << h.epsilon; break;
      case Algorithm::rprop:
        std::cout << "eta_minus=" << h.eta_minus << " eta_plus=" << h.eta_plus << " s_min=" << h.s_min
                  << " s0=" << h.s0;
        break;
      case Algorithm::core: break;
    }
    std::cout << (alg == Algorithm::sgd ? "" : " ") << "weight_decay=" << h.weight_decay << '\n';
  }
  std::cout << "\ntasks:\n";
  for (const auto& t : kBuiltinTasks)
    std::cout << "  " << std::left << std::setw(25) << t.name << std::setw(14) << to_string(t.regime)
              << "epochs=" << std::setw(6) << t.default_epochs << t.description << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for first-order optimizers (CoRe and nine baselines)", "opt-bench"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a benchmark suite from a JSON config");
  std::string config_path;
  bool dry_run = false;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
  run->add_option("--config", config_path, "Suite configuration (JSON)")->required();
  run->add_flag("--dry-run", dry_run, "Print the number of cells and exit");
  run->add_option("--workers", workers, "Parallel worker threads (0 = all cores)");
  run->add_option("--out", out_dir, "Output directory (overrides OPT_BENCH_OUT and the config)");

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  std::string layers_arg = "2,4,3";
  std::string activation = "tanh";
  std::string loss = "mse";
  std::size_t draws = 20;
  bool corrupt = false;
  grad->add_option("--layers", layers_arg, "Comma-separated layer sizes");
  grad->add_option("--activation", activation, "Hidden activation: tanh or relu");
  grad->add_option("--loss", loss, "mse or cross_entropy");
  grad->add_option("--draws", draws, "Number of random draws");
  grad->add_flag("--corrupt-gradient", corrupt, "Perturb the analytic gradient (negative control)")
      ->group("");

  app.add_subcommand("list", "List algorithms with defaults and built-in tasks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (run->parsed()) return cmd_run(config_path, dry_run, workers, out_dir);
  if (grad->parsed()) {
    std::vector<std::size_t> layers;
    std::stringstream ss(layers_arg);
    for (std::string tok; std::getline(ss, tok, ',');) {
      try {
        std::size_t pos = 0;
        const auto v = std::stoul(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        layers.push_back(v);
      } catch (const std::exception&) {
        std::cerr << "opt-bench: bad layer size '" << tok << "'\n";
        return kExitConfig;
      }
    }
    return cmd_gradcheck(layers, activation, loss, draws, corrupt);
  }
  return cmd_list();
}
