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

// manifold-ris: runs the RIS experiments from JSON configs.
//
//   manifold-ris app1 --config configs/app1.json --trials 200 --parallel 8 --out app1.csv
//   manifold-ris sweep --config configs/app2.json --param N --values 20,40,60
//   manifold-ris selftest
//
// Exit codes: 0 success, 1 bad config or arguments, 2 runtime failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mris/experiment.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallel;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config,-c", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--trials,-n", o.trials, "number of Monte Carlo trials");
  cmd->add_option("--seed,-s", o.seed, "base seed; trial t uses seed + t");
  cmd->add_option("--parallel,-j", o.parallel, "worker threads");
  cmd->add_option("--out,-o", o.out, "CSV output path (stdout if empty)");
}

mris::ExperimentConfig resolve(const Overrides& o, std::optional<mris::AppKind> app) {
  mris::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = mris::load_experiment_config(o.config);
    if (app && cfg.app != *app) {
      throw mris::ConfigError("config file is for " + mris::to_string(cfg.app) + ", not " +
                              mris::to_string(*app));
    }
  } else if (app) {
    cfg.app = *app;
  } else {
    throw mris::ConfigError("--config is required");
  }
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.parallel) cfg.parallel = *o.parallel;
  if (o.out) cfg.output = *o.out;
  cfg.validate();
  return cfg;
}

int emit(const mris::ExperimentResult& res, const std::string& output) {
  if (output.empty()) {
    mris::write_csv(res.table, std::cout);
    mris::print_summary(res, std::cerr);
  } else {
    mris::write_csv_file(res.table, output);
    mris::print_summary(res, std::cout);
    std::cout << "wrote " << res.table.rows.size() << " rows to " << output << '\n';
  }
  return res.failures.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian manifold optimization for RIS-aided systems"};
  app.require_subcommand(1);

  Overrides o;
  std::string patterns;
  std::optional<mris::AppKind> chosen;
  for (auto kind : {mris::AppKind::App1, mris::AppKind::App2, mris::AppKind::App3, mris::AppKind::App4}) {
    const std::string name = mris::to_string(kind);
    auto* cmd = app.add_subcommand(name, "run " + name);
    add_common(cmd, o);
    if (kind == mris::AppKind::App4) {
      cmd->add_option("--patterns", patterns, "also write the reflection patterns to this CSV");
    }
    cmd->callback([&chosen, kind] { chosen = kind; });
  }

  auto* sweep = app.add_subcommand("sweep", "run one experiment per parameter value");
  add_common(sweep, o);
  std::string param, values;
  sweep->add_option("--param,-p", param, "params key, dotted for nested fields")->required();
  sweep->add_option("--values,-v", values, "comma separated values")->required();

  auto* selftest = app.add_subcommand("selftest", "manifold, gradient and solver sanity checks");
  add_common(selftest, o);
  selftest->callback([&chosen] { chosen = mris::AppKind::Selftest; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sweep->parsed()) {
      const mris::ExperimentConfig cfg = resolve(o, std::nullopt);
      return emit(mris::run_sweep(cfg, param, mris::parse_value_list(values)), cfg.output);
    }
    const mris::ExperimentConfig cfg = resolve(o, chosen);
    if (cfg.app == mris::AppKind::App4 && !patterns.empty()) {
      const mris::GfraConfig g = mris::gfra_config_from_json(cfg.params);
      mris::write_csv_file(mris::pattern_table(g, mris::prepare_gfra(g)), patterns);
    }
    const mris::ExperimentResult res = mris::run_experiment(cfg);
    int code = emit(res, cfg.output);
    if (cfg.app == mris::AppKind::Selftest) {
      const auto passed = res.table.column("passed");
      for (const auto& row : res.table.rows) {
        if (row[passed] != "1") code = 2;
      }
    }
    return code;
  } catch (const mris::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
