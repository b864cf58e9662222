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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "optbench/bench.hpp"
#include "optbench/config.hpp"

namespace optbench {

/// Failure to create or write report files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips; "nan"/"inf" for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), end};
}

/// task,optimizer,lr,seed,epoch,test_error (epochs are 1-based).
inline void write_traces_csv(std::ostream& os, const BenchmarkReport& report) {
  os << "task,optimizer,lr,seed,epoch,test_error\n";
  for (const auto& c : report.cells) {
    const auto lr = format_number(c.lr);
    for (std::size_t e = 0; e < c.trace.test_errors.size(); ++e)
      os << c.task << ',' << c.optimizer << ',' << lr << ',' << c.seed_index << ',' << e + 1 << ','
         << format_number(c.trace.test_errors[e]) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const BenchmarkReport& report) {
  os << "task,optimizer,selected_lr,E_min_mean,E_min_std,A_i,dA_i\n";
  for (const auto& r : report.summary)
    os << r.task << ',' << r.optimizer << ',' << format_number(r.selected_lr) << ',' << format_number(r.mean) << ','
       << format_number(r.std) << ',' << format_number(r.accuracy.value) << ','
       << format_number(r.accuracy.uncertainty) << '\n';
}

inline void write_overall_csv(std::ostream& os, const BenchmarkReport& report) {
  os << "optimizer,A_bar,dA_bar\n";
  for (const auto& r : report.overall)
    os << r.optimizer << ',' << format_number(r.score.value) << ',' << format_number(r.score.uncertainty) << '\n';
}

/// Summary, grid scan, overall scores and the full config echo.
inline nlohmann::json summary_json(const BenchmarkReport& report, const SuiteConfig& config) {
  nlohmann::json j;
  j["config"] = to_json(config);
  j["summary"] = nlohmann::json::array();
  for (const auto& r : report.summary)
    j["summary"].push_back({{"task", r.task},
                            {"optimizer", r.optimizer},
                            {"selected_lr", r.selected_lr},
                            {"E_min_mean", r.mean},
                            {"E_min_std", r.std},
                            {"failed_runs", r.failed_runs},
                            {"A_i", r.accuracy.value},
                            {"dA_i", r.accuracy.uncertainty}});
  j["grid"] = nlohmann::json::array();
  for (const auto& g : report.grid)
    j["grid"].push_back({{"task", g.task},
                         {"optimizer", g.optimizer},
                         {"lr", g.lr},
                         {"E_min_mean", g.mean},
                         {"E_min_std", g.std},
                         {"failed_runs", g.failed_runs}});
  j["overall"] = nlohmann::json::array();
  for (const auto& o : report.overall)
    j["overall"].push_back({{"optimizer", o.optimizer}, {"A_bar", o.score.value}, {"dA_bar", o.score.uncertainty}});
  j["penalties"] = report.penalties;
  j["warnings"] = report.warnings;
  return j;
}

inline constexpr std::array<const char*, 4> kReportFiles{"traces.csv", "summary.csv", "overall.csv", "summary.json"};

/// Writes the three CSVs and the JSON summary into `dir` (created if needed).
inline std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir,
                                                       const BenchmarkReport& report, const SuiteConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, auto&& body) {
    const auto path = dir / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    body(os);
    os.flush();
    if (!os) throw IoError("failed writing '" + path.string() + "'");
    written.push_back(path);
  };
  emit(kReportFiles[0], [&](std::ostream& os) { write_traces_csv(os, report); });
  emit(kReportFiles[1], [&](std::ostream& os) { write_summary_csv(os, report); });
  emit(kReportFiles[2], [&](std::ostream& os) { write_overall_csv(os, report); });
  emit(kReportFiles[3], [&](std::ostream& os) { os << summary_json(report, config).dump(2) << '\n'; });
  return written;
}

}  // namespace optbench
