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

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "optbench/bench.hpp"
#include "optbench/errors.hpp"
#include "optbench/optimizer.hpp"

namespace optbench {

/// Invalid suite configuration. The message starts with the offending key.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string, std::less<>>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ConfigError(where + "." + key + ": unknown key");
}

template <typename T>
T get_as(const json& obj, std::string_view key, const std::string& where) {
  try {
    return obj.at(std::string(key)).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + std::string(key) + ": wrong type");
  }
}

template <typename T>
void read_opt(const json& obj, std::string_view key, T& out, const std::string& where) {
  if (obj.contains(std::string(key))) out = get_as<T>(obj, key, where);
}

inline std::size_t read_count(const json& obj, std::string_view key, const std::string& where) {
  const auto& v = obj.at(std::string(key));
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError(where + "." + std::string(key) + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

inline const std::set<std::string, std::less<>> kCoreKeys{
    "algorithm", "label", "beta1_a", "beta1_b", "beta1_c", "beta2", "epsilon", "eta_minus", "eta_plus", "s_min",
    "s_max", "s0", "d", "d_per_group", "t_hist", "p_frozen", "p_frozen_per_group", "maximize"};

inline const std::set<std::string, std::less<>> kBaselineKeys{
    "algorithm", "label", "gamma", "mu", "beta1", "beta2", "epsilon", "eta_minus", "eta_plus", "s_min", "s_max",
    "s0", "weight_decay", "decay_mode", "maximize"};

inline OptimizerSpec parse_optimizer(const json& j, const std::string& where) {
  if (j.is_string()) {
    try {
      return OptimizerSpec::defaults(parse_algorithm(j.get<std::string>()));
    } catch (const InvalidArgument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (!j.is_object()) throw ConfigError(where + ": expected an algorithm name or an object");
  if (!j.contains("algorithm")) throw ConfigError(where + ".algorithm: missing");
  Algorithm alg{};
  try {
    alg = parse_algorithm(get_as<std::string>(j, "algorithm", where));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ".algorithm: " + e.what());
  }
  auto spec = OptimizerSpec::defaults(alg);
  read_opt(j, "label", spec.label, where);
  if (alg == Algorithm::core) {
    reject_unknown(j, kCoreKeys, where);
    auto& c = spec.core;
    read_opt(j, "beta1_a", c.beta1_a, where);
    read_opt(j, "beta1_b", c.beta1_b, where);
    read_opt(j, "beta1_c", c.beta1_c, where);
    read_opt(j, "beta2", c.beta2, where);
    read_opt(j, "epsilon", c.epsilon, where);
    read_opt(j, "eta_minus", c.eta_minus, where);
    read_opt(j, "eta_plus", c.eta_plus, where);
    read_opt(j, "s_min", c.s_min, where);
    read_opt(j, "s_max", c.s_max, where);
    read_opt(j, "s0", c.s0, where);
    read_opt(j, "d", c.d, where);
    read_opt(j, "d_per_group", c.d_per_group, where);
    read_opt(j, "t_hist", c.t_hist, where);
    read_opt(j, "p_frozen", c.p_frozen, where);
    read_opt(j, "p_frozen_per_group", c.p_frozen_per_group, where);
    read_opt(j, "maximize", c.maximize, where);
  } else {
    reject_unknown(j, kBaselineKeys, where);
    auto& b = spec.baseline;
    read_opt(j, "gamma", b.gamma, where);
    read_opt(j, "mu", b.mu, where);
    read_opt(j, "beta1", b.beta1, where);
    read_opt(j, "beta2", b.beta2, where);
    read_opt(j, "epsilon", b.epsilon, where);
    read_opt(j, "eta_minus", b.eta_minus, where);
    read_opt(j, "eta_plus", b.eta_plus, where);
    read_opt(j, "s_min", b.s_min, where);
    read_opt(j, "s_max", b.s_max, where);
    read_opt(j, "s0", b.s0, where);
    read_opt(j, "weight_decay", b.weight_decay, where);
    if (j.contains("decay_mode")) {
      try {
        b.decay_mode = parse_decay_mode(get_as<std::string>(j, "decay_mode", where));
      } catch (const ConfigError&) {
        throw;
      } catch (const InvalidArgument& e) {
        throw ConfigError(where + ".decay_mode: " + e.what());
      }
    }
    read_opt(j, "maximize", b.maximize, where);
  }
  return spec;
}

inline std::vector<double> parse_grid(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> g;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + ": expected an array of numbers");
    g.push_back(v.get<double>());
  }
  return g;
}

inline TaskEntry parse_task(const json& j, const std::string& where) {
  TaskEntry t;
  if (j.is_string()) {
    t.name = j.get<std::string>();
  } else if (j.is_object()) {
    reject_unknown(j, {"name", "epochs", "dim", "lr_grid"}, where);
    if (!j.contains("name")) throw ConfigError(where + ".name: missing");
    t.name = get_as<std::string>(j, "name", where);
    if (j.contains("epochs")) t.overrides.epochs = read_count(j, "epochs", where);
    if (j.contains("dim")) t.overrides.dim = read_count(j, "dim", where);
    if (j.contains("lr_grid")) t.lr_grid = parse_grid(j.at("lr_grid"), where + ".lr_grid");
  } else {
    throw ConfigError(where + ": expected a task name or an object");
  }
  return t;
}

}  // namespace detail

/// Parses and validates a suite configuration.
inline SuiteConfig parse_suite_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  detail::reject_unknown(
      j, {"master_seed", "seeds", "lr_grid", "tasks", "optimizers", "penalty", "select_by", "workers", "output_dir"},
      "config");
  SuiteConfig cfg;
  if (j.contains("master_seed")) {
    const auto& v = j.at("master_seed");
    if (!v.is_number_integer()) throw ConfigError("config.master_seed: expected an integer");
    cfg.master_seed = v.is_number_unsigned() ? v.get<std::uint64_t>() : static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (j.contains("seeds")) cfg.seeds = detail::read_count(j, "seeds", "config");
  if (j.contains("workers")) cfg.workers = detail::read_count(j, "workers", "config");
  if (j.contains("lr_grid")) cfg.lr_grid = detail::parse_grid(j.at("lr_grid"), "config.lr_grid");
  detail::read_opt(j, "output_dir", cfg.output_dir, "config");
  if (j.contains("select_by")) {
    const auto s = detail::get_as<std::string>(j, "select_by", "config");
    if (s == "mean") {
      cfg.select_by = SelectBy::mean;
    } else if (s == "std") {
      cfg.select_by = SelectBy::std;
    } else {
      throw ConfigError("config.select_by: expected 'mean' or 'std'");
    }
  }
  if (j.contains("penalty")) {
    const auto& p = j.at("penalty");
    if (!p.is_object()) throw ConfigError("config.penalty: expected an object");
    detail::reject_unknown(p, {"mode", "factor", "value"}, "config.penalty");
    if (p.contains("mode")) {
      const auto m = detail::get_as<std::string>(p, "mode", "config.penalty");
      if (m == "relative") {
        cfg.penalty.mode = PenaltyPolicy::Mode::relative;
      } else if (m == "absolute") {
        cfg.penalty.mode = PenaltyPolicy::Mode::absolute;
      } else {
        throw ConfigError("config.penalty.mode: expected 'relative' or 'absolute'");
      }
    }
    detail::read_opt(p, "factor", cfg.penalty.factor, "config.penalty");
    detail::read_opt(p, "value", cfg.penalty.value, "config.penalty");
  }
  if (!j.contains("tasks") || !j.at("tasks").is_array()) throw ConfigError("config.tasks: expected an array");
  for (std::size_t i = 0; i < j.at("tasks").size(); ++i)
    cfg.tasks.push_back(detail::parse_task(j.at("tasks")[i], "config.tasks[" + std::to_string(i) + "]"));
  if (!j.contains("optimizers") || !j.at("optimizers").is_array())
    throw ConfigError("config.optimizers: expected an array");
  for (std::size_t i = 0; i < j.at("optimizers").size(); ++i)
    cfg.optimizers.push_back(
        detail::parse_optimizer(j.at("optimizers")[i], "config.optimizers[" + std::to_string(i) + "]"));
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config.") + e.what());
  }
  return cfg;
}

inline SuiteConfig load_suite_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_suite_config(j);
}

/// Full JSON form of an optimizer spec, every hyperparameter spelled out.
inline nlohmann::json to_json(const OptimizerSpec& spec) {
  nlohmann::json j;
  j["algorithm"] = std::string(to_string(spec.algorithm));
  j["label"] = spec.label;
  if (spec.algorithm == Algorithm::core) {
    const auto& c = spec.core;
    j["beta1_a"] = c.beta1_a;
    j["beta1_b"] = c.beta1_b;
    j["beta1_c"] = c.beta1_c;
    j["beta2"] = c.beta2;
    j["epsilon"] = c.epsilon;
    j["eta_minus"] = c.eta_minus;
    j["eta_plus"] = c.eta_plus;
    j["s_min"] = c.s_min;
    j["s_max"] = c.s_max;
    j["s0"] = c.s0;
    j["d"] = c.d;
    j["d_per_group"] = c.d_per_group;
    j["t_hist"] = c.t_hist;
    j["p_frozen"] = c.p_frozen;
    j["p_frozen_per_group"] = c.p_frozen_per_group;
    j["maximize"] = c.maximize;
  } else {
    const auto& b = spec.baseline;
    j["gamma"] = b.gamma;
    j["mu"] = b.mu;
    j["beta1"] = b.beta1;
    j["beta2"] = b.beta2;
    j["epsilon"] = b.epsilon;
    j["eta_minus"] = b.eta_minus;
    j["eta_plus"] = b.eta_plus;
    j["s_min"] = b.s_min;
    j["s_max"] = b.s_max;
    j["s0"] = b.s0;
    j["weight_decay"] = b.weight_decay;
    j["decay_mode"] = std::string(to_string(b.decay_mode));
    j["maximize"] = b.maximize;
  }
  return j;
}

/// Echo of a configuration that parse_suite_config() reads back unchanged.
inline nlohmann::json to_json(const SuiteConfig& cfg) {
  nlohmann::json j;
  j["master_seed"] = cfg.master_seed;
  j["seeds"] = cfg.seeds;
  j["lr_grid"] = cfg.lr_grid;
  j["workers"] = cfg.workers;
  j["output_dir"] = cfg.output_dir;
  j["select_by"] = cfg.select_by == SelectBy::mean ? "mean" : "std";
  j["penalty"] = {{"mode", cfg.penalty.mode == PenaltyPolicy::Mode::relative ? "relative" : "absolute"},
                  {"factor", cfg.penalty.factor},
                  {"value", cfg.penalty.value}};
  j["tasks"] = nlohmann::json::array();
  for (const auto& t : cfg.tasks) {
    nlohmann::json tj{{"name", t.name}};
    if (t.overrides.epochs) tj["epochs"] = *t.overrides.epochs;
    if (t.overrides.dim) tj["dim"] = *t.overrides.dim;
    if (t.lr_grid) tj["lr_grid"] = *t.lr_grid;
    j["tasks"].push_back(tj);
  }
  j["optimizers"] = nlohmann::json::array();
  for (const auto& o : cfg.optimizers) j["optimizers"].push_back(to_json(o));
  return j;
}

}  // namespace optbench
