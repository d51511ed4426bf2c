// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file experiment.hpp
 * @brief JSON experiment configs, seeded trial-parallel execution, CSV output
 * and parameter sweeps.
 *
 * Config layout:
 * @code
 * { "app": "app1", "trials": 200, "base_seed": 1, "parallel": 8,
 *   "output": "app1.csv", "params": { ...application fields... } }
 * @endcode
 * Trial t runs with seed base_seed + t. Rows are merged in trial order, so
 * the CSV does not depend on the worker count.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mris/energy.hpp"
#include "mris/fairness.hpp"
#include "mris/pilot_reuse.hpp"
#include "mris/random_access.hpp"

namespace mris {

/// Bumped whenever a CSV column set changes.
inline constexpr int kCsvHeaderVersion = 1;

enum class AppKind { App1, App2, App3, App4, Selftest };
std::string to_string(AppKind a);
AppKind parse_app_kind(const std::string& name);

struct ExperimentConfig {
  AppKind app = AppKind::App1;
  int trials = 1;
  std::uint64_t base_seed = 1;
  int parallel = 1;
  std::string output;
  nlohmann::json params = nlohmann::json::object();

  void validate() const;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// Application parameter blocks. Unknown keys are rejected.
FairnessConfig fairness_config_from_json(const nlohmann::json& j);
EnergyConfig energy_config_from_json(const nlohmann::json& j);
PilotConfig pilot_config_from_json(const nlohmann::json& j);
GfraConfig gfra_config_from_json(const nlohmann::json& j);

/// 16 hex digits of FNV-1a over the canonical JSON of (app, trials,
/// base_seed, params). Key order, parallelism and output path do not matter.
std::string config_hash(const ExperimentConfig& cfg);

/// %.9g, with "nan", "inf" and "-inf" spelled out.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Index column(const std::string& name) const;
};

void write_csv(const CsvTable& table, std::ostream& os);
void write_csv_file(const CsvTable& table, const std::string& path);

struct TrialFailure {
  int trial = 0;
  std::string message;
};

struct MetricSummary {
  std::string group;   ///< e.g. "method=mo pmax_dbm=25"
  std::string metric;
  int count = 0;
  double mean = 0.0;
  double half_width = 0.0;  ///< 1.96 s / sqrt(n)
};

struct ExperimentResult {
  CsvTable table;
  std::vector<TrialFailure> failures;
  std::vector<MetricSummary> summary;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// One run per value with a shared base seed; rows gain sweep_param and
/// sweep_param_value columns. `param` is a params key, dotted for nesting.
ExperimentResult run_sweep(const ExperimentConfig& base, const std::string& param,
                           const std::vector<nlohmann::json>& values);

/// Parses "1,2.5,abc" into numbers where possible, strings otherwise.
std::vector<nlohmann::json> parse_value_list(const std::string& csv);

void print_summary(const ExperimentResult& result, std::ostream& os);

/// App 4 reflection patterns: columns scheme, config, angle_deg, gain_db.
CsvTable pattern_table(const GfraConfig& cfg, const GfraDeployment& dep, int points = 721);

}  // namespace mris
