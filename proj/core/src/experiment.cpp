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

#include "mris/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "mris/selftest.hpp"

namespace mris {
namespace {

using nlohmann::json;

// Reads fields out of one JSON object and rejects whatever is left over.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + "has the wrong type");
    }
  }

  void get(const char* key, Index& out) {
    long long v = out;
    get(key, v);
    out = static_cast<Index>(v);
  }

  void get(const char* key, std::uint64_t& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      throw ConfigError(where(key) + "must be a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  /// Scalars are accepted as one-element lists.
  template <typename T>
  void get_list(const char* key, std::vector<T>& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& v = j_.at(key);
    try {
      if (v.is_array()) {
        out = v.get<std::vector<T>>();
      } else {
        out = {v.get<T>()};
      }
    } catch (const json::exception&) {
      throw ConfigError(where(key) + "has the wrong type");
    }
  }

  /// Numbers, or null / "-inf" / "inf" for the infinities.
  void get_extended(const char* key, double& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& v = j_.at(key);
    if (v.is_null() || v == "-inf") {
      out = -std::numeric_limits<double>::infinity();
    } else if (v == "inf") {
      out = std::numeric_limits<double>::infinity();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError(where(key) + "must be a number, null, \"inf\" or \"-inf\"");
    }
  }

  template <typename E, typename Parse>
  void get_enum(const char* key, E& out, Parse parse) {
    std::string s;
    get(key, s);
    if (!j_.contains(key)) return;
    try {
      out = parse(s);
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + e.what());
    } catch (const Error& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

  template <typename E, typename Parse>
  void get_enum_list(const char* key, std::vector<E>& out, Parse parse) {
    std::vector<std::string> names;
    get_list(key, names);
    if (!j_.contains(key)) return;
    out.clear();
    for (const auto& n : names) {
      try {
        out.push_back(parse(n));
      } catch (const Error& e) {
        throw ConfigError(where(key) + e.what());
      }
    }
  }

  const json* sub(const char* key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where(k.c_str()) + "unknown field");
    }
  }

 private:
  std::string where(const char* key = nullptr) const {
    std::string p = path_;
    if (key) p = p.empty() ? key : p + "." + key;
    return p.empty() ? "config: " : "config field '" + p + "': ";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FadingModel parse_fading_model(const std::string& s) {
  if (s == "pure_los") return FadingModel::PureLos;
  if (s == "rician") return FadingModel::Rician;
  throw ConfigError("expected pure_los or rician");
}

AngleModel parse_angle_model(const std::string& s) {
  if (s == "random") return AngleModel::RandomUniform;
  if (s == "geometric") return AngleModel::Geometric;
  throw ConfigError("expected random or geometric");
}

BsRisStructure parse_bs_ris(const std::string& s) {
  if (s == "rank_one") return BsRisStructure::RankOne;
  if (s == "per_element") return BsRisStructure::PerElement;
  throw ConfigError("expected rank_one or per_element");
}

StepRule parse_step_rule(const std::string& s) {
  if (s == "armijo") return StepRule::Armijo;
  if (s == "fixed") return StepRule::Fixed;
  throw ConfigError("expected armijo or fixed");
}

void read_fading(Fields& f, const char* key, FadingConfig& out) {
  const json* j = f.sub(key);
  if (!j) return;
  Fields g(*j, f.child(key));
  g.get_enum("model", out.model, parse_fading_model);
  g.get("kappa", out.kappa);
  g.get_enum("angles", out.angles, parse_angle_model);
  g.get_enum("bs_ris", out.bs_ris, parse_bs_ris);
  g.get("direct_link", out.direct_link);
  g.finish();
}

void read_solver_options(Fields& f, const char* key, SolverOptions& out) {
  const json* j = f.sub(key);
  if (!j) return;
  Fields g(*j, f.child(key));
  g.get("max_iters", out.max_iters);
  g.get("grad_tol", out.grad_tol);
  g.get_enum("step_rule", out.step_rule, parse_step_rule);
  g.get("fixed_step", out.fixed_step);
  g.get("cg_restart_period", out.cg_restart_period);
  if (const json* a = g.sub("armijo")) {
    Fields h(*a, g.child("armijo"));
    h.get("c1", out.armijo.c1);
    h.get("shrink", out.armijo.shrink);
    h.get("init_step", out.armijo.init_step);
    h.get("max_backtracks", out.armijo.max_backtracks);
    h.get("adaptive", out.armijo.adaptive);
    h.finish();
  }
  g.finish();
  if (out.max_iters < 0) throw ConfigError("config field '" + f.child(key) + ".max_iters': must be >= 0");
  if (!(out.grad_tol >= 0.0)) throw ConfigError("config field '" + f.child(key) + ".grad_tol': must be >= 0");
}

void read_pso(Fields& f, const char* key, PsoOptions& out) {
  const json* j = f.sub(key);
  if (!j) return;
  Fields g(*j, f.child(key));
  g.get("swarm_size", out.swarm_size);
  g.get("inertia", out.inertia);
  g.get("cognitive", out.cognitive);
  g.get("social", out.social);
  g.finish();
  if (out.swarm_size < 1) throw ConfigError("config field '" + f.child(key) + ".swarm_size': must be >= 1");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt_int(long long v) { return std::to_string(v); }

std::string fmt_bool(bool b) { return b ? "1" : "0"; }

using Rows = std::vector<std::vector<std::string>>;

struct AppRunner {
  std::vector<std::string> columns;
  std::vector<std::string> group_by;
  std::vector<std::string> metrics;
  std::function<Rows(int trial, std::uint64_t seed)> run;
};

AppRunner make_runner(const ExperimentConfig& cfg) {
  AppRunner r;
  switch (cfg.app) {
    case AppKind::App1: {
      auto c = std::make_shared<FairnessConfig>(fairness_config_from_json(cfg.params));
      r.columns = {"method", "pmax_dbm", "trial", "common_rate_bps_hz", "runtime_ms", "iters",
                   "sinr_spread", "gamma"};
      r.group_by = {"method", "pmax_dbm"};
      r.metrics = {"common_rate_bps_hz"};
      r.run = [c](int trial, std::uint64_t seed) {
        Rows rows;
        for (const auto& x : run_fairness_trial(*c, trial, seed).rows) {
          rows.push_back({x.method, format_double(x.pmax_dbm), fmt_int(x.trial),
                          format_double(x.common_rate_bps_hz), format_double(x.runtime_ms),
                          fmt_int(x.iters), format_double(x.sinr_spread), format_double(x.gamma)});
        }
        return rows;
      };
      break;
    }
    case AppKind::App2: {
      auto c = std::make_shared<EnergyConfig>(energy_config_from_json(cfg.params));
      r.columns = {"scheme", "sweep_axis", "sweep_value", "trial", "p_ut_dbm", "feasible",
                   "outer_iters_used", "max_target_error"};
      r.group_by = {"scheme", "sweep_value"};
      r.metrics = {"p_ut_dbm", "feasible"};
      r.run = [c](int trial, std::uint64_t seed) {
        Rows rows;
        for (const auto& x : run_energy_trial(*c, trial, seed).rows) {
          rows.push_back({x.scheme, x.sweep_axis, format_double(x.sweep_value), fmt_int(x.trial),
                          format_double(x.p_ut_dbm), fmt_bool(x.feasible),
                          fmt_int(x.outer_iters_used), format_double(x.max_target_error)});
        }
        return rows;
      };
      break;
    }
    case AppKind::App3: {
      auto c = std::make_shared<PilotConfig>(pilot_config_from_json(cfg.params));
      r.columns = {"scheme", "sweep_axis", "sweep_value", "user_class", "trial", "se_bps_hz"};
      r.group_by = {"scheme", "user_class", "sweep_value"};
      r.metrics = {"se_bps_hz"};
      r.run = [c](int trial, std::uint64_t seed) {
        Rows rows;
        for (const auto& x : run_pilot_trial(*c, trial, seed).rows) {
          rows.push_back({x.scheme, x.sweep_axis, format_double(x.sweep_value), x.user_class,
                          fmt_int(x.trial), format_double(x.se_bps_hz)});
        }
        return rows;
      };
      break;
    }
    case AppKind::App4: {
      auto c = std::make_shared<GfraConfig>(gfra_config_from_json(cfg.params));
      auto dep = std::make_shared<GfraDeployment>(prepare_gfra(*c));
      r.columns = {"scheme", "device_count", "trial", "successes", "throughput", "sum_se_bpcu"};
      r.group_by = {"scheme", "device_count"};
      r.metrics = {"throughput", "sum_se_bpcu"};
      r.run = [c, dep](int trial, std::uint64_t seed) {
        Rows rows;
        for (int n : c->device_counts) {
          for (const auto& x : run_gfra_trial(*c, *dep, n, trial, seed)) {
            rows.push_back({x.scheme, fmt_int(x.device_count), fmt_int(x.trial),
                            fmt_int(x.successes), format_double(x.throughput),
                            format_double(x.sum_se_bpcu)});
          }
        }
        return rows;
      };
      break;
    }
    case AppKind::Selftest: {
      Fields f(cfg.params, "params");
      f.finish();
      r.columns = {"trial", "check", "value", "tolerance", "passed"};
      r.group_by = {"check"};
      r.metrics = {"passed"};
      r.run = [](int trial, std::uint64_t seed) {
        Rows rows;
        for (const auto& c : run_selftest(seed)) {
          rows.push_back({fmt_int(trial), c.name, format_double(c.value), format_double(c.tolerance),
                          fmt_bool(c.passed)});
        }
        return rows;
      };
      break;
    }
  }
  return r;
}

std::vector<MetricSummary> summarize(const CsvTable& t, std::vector<std::string> group_by,
                                     const std::vector<std::string>& metrics) {
  std::vector<Index> gcols, mcols;
  for (const auto& g : group_by) gcols.push_back(t.column(g));
  for (const auto& m : metrics) mcols.push_back(t.column(m));

  struct Acc {
    std::vector<double> values;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Acc>> acc;
  for (const auto& row : t.rows) {
    std::string key;
    for (std::size_t i = 0; i < gcols.size(); ++i) {
      if (i) key += ' ';
      key += group_by[i] + "=" + row[gcols[i]];
    }
    auto it = acc.find(key);
    if (it == acc.end()) {
      order.push_back(key);
      it = acc.emplace(key, std::vector<Acc>(mcols.size())).first;
    }
    for (std::size_t m = 0; m < mcols.size(); ++m) {
      const double v = std::strtod(row[mcols[m]].c_str(), nullptr);
      if (std::isfinite(v)) it->second[m].values.push_back(v);
    }
  }
  std::vector<MetricSummary> out;
  for (const auto& key : order) {
    const auto& a = acc.at(key);
    for (std::size_t m = 0; m < mcols.size(); ++m) {
      MetricSummary s;
      s.group = key;
      s.metric = metrics[m];
      s.count = static_cast<int>(a[m].values.size());
      if (s.count > 0) {
        double sum = 0.0;
        for (double v : a[m].values) sum += v;
        s.mean = sum / s.count;
        if (s.count > 1) {
          double ss = 0.0;
          for (double v : a[m].values) ss += (v - s.mean) * (v - s.mean);
          s.half_width = 1.96 * std::sqrt(ss / (s.count - 1)) / std::sqrt(static_cast<double>(s.count));
        }
      } else {
        s.mean = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(s);
    }
  }
  return out;
}

void set_dotted(json& j, const std::string& path, const json& value) {
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("sweep parameter '" + path + "' is malformed");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    if (!node->is_object()) throw ConfigError("sweep parameter '" + path + "' does not name an object path");
    start = dot + 1;
  }
}

std::string value_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace

std::string to_string(AppKind a) {
  switch (a) {
    case AppKind::App1:
      return "app1";
    case AppKind::App2:
      return "app2";
    case AppKind::App3:
      return "app3";
    case AppKind::App4:
      return "app4";
    case AppKind::Selftest:
      return "selftest";
  }
  return "unknown";
}

AppKind parse_app_kind(const std::string& name) {
  if (name == "app1") return AppKind::App1;
  if (name == "app2") return AppKind::App2;
  if (name == "app3") return AppKind::App3;
  if (name == "app4") return AppKind::App4;
  if (name == "selftest") return AppKind::Selftest;
  throw ConfigError("unknown app '" + name + "' (expected app1..app4 or selftest)");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("config field 'trials': must be >= 1");
  if (parallel < 1) throw ConfigError("config field 'parallel': must be >= 1");
  if (!params.is_object()) throw ConfigError("config field 'params': expected an object");
}

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  Fields f(j, "");
  if (!f.has("app")) throw ConfigError("config field 'app': missing");
  f.get_enum("app", cfg.app, parse_app_kind);
  f.get("trials", cfg.trials);
  f.get("base_seed", cfg.base_seed);
  f.get("parallel", cfg.parallel);
  f.get("output", cfg.output);
  if (const json* p = f.sub("params")) cfg.params = *p;
  f.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

FairnessConfig fairness_config_from_json(const json& j) {
  FairnessConfig c;
  Fields f(j, "params");
  f.get("M", c.M);
  f.get("K", c.K);
  f.get("N", c.N);
  f.get_list("pmax_dbm", c.pmax_dbm);
  f.get("noise_dbm", c.noise_dbm);
  f.get_enum("solver", c.solver, parse_solver_kind);
  f.get("random_phase", c.random_phase);
  f.get("analytical", c.analytical);
  f.get("radius_m", c.radius_m);
  f.get("ris_distance_m", c.ris_distance_m);
  f.get("reference_gain_db", c.reference_gain_db);
  read_fading(f, "fading", c.fading);
  read_solver_options(f, "solver_options", c.solver_opts);
  read_pso(f, "pso", c.pso);
  f.get("analytical_max_sweeps", c.analytical_max_sweeps);
  f.get("analytical_tol", c.analytical_tol);
  f.get("max_resamples", c.max_resamples);
  f.get("record_runtime", c.record_runtime);
  f.finish();
  c.validate();
  return c;
}

EnergyConfig energy_config_from_json(const json& j) {
  EnergyConfig c;
  Fields f(j, "params");
  f.get("M", c.M);
  f.get("N", c.N);
  f.get("K", c.K);
  f.get("pmax_dbm", c.pmax_dbm);
  f.get("noise_dbm", c.noise_dbm);
  f.get_list("se_targets", c.se_targets);
  f.get_enum_list("schemes", c.schemes, parse_ee_scheme);
  f.get("outer_iters", c.outer_iters);
  f.get("outer_tol_db", c.outer_tol_db);
  f.get("mu", c.mu);
  f.get("radius_m", c.radius_m);
  f.get("ris_distance_m", c.ris_distance_m);
  f.get("reference_gain_db", c.reference_gain_db);
  read_fading(f, "fading", c.fading);
  read_solver_options(f, "solver_options", c.solver_opts);
  read_pso(f, "pso", c.pso);
  f.get("pso_iters", c.pso_iters);
  f.get("pc_max_iters", c.pc_max_iters);
  f.get("pc_tol", c.pc_tol);
  f.get("sweep_axis", c.sweep_axis);
  f.finish();
  c.validate();
  return c;
}

PilotConfig pilot_config_from_json(const json& j) {
  PilotConfig c;
  Fields f(j, "params");
  f.get("R", c.R);
  f.get("tau_p", c.tau_p);
  f.get("M", c.M);
  f.get("N", c.N);
  f.get("tau_c", c.tau_c);
  f.get("pilot_power_dbm", c.pilot_power_dbm);
  f.get("noise_dbm", c.noise_dbm);
  f.get("sector_min_deg", c.sector_min_deg);
  f.get("sector_max_deg", c.sector_max_deg);
  f.get("ris_distance_m", c.ris_distance_m);
  f.get("far_offset_m", c.far_offset_m);
  f.get("far_radius_m", c.far_radius_m);
  f.get("near_min_m", c.near_min_m);
  f.get("near_radius_m", c.near_radius_m);
  f.get("reference_gain_db", c.reference_gain_db);
  f.get("kappa", c.kappa);
  f.get_enum_list("schemes", c.schemes, parse_pilot_scheme);
  f.get_enum("estimator", c.estimator, parse_channel_estimator);
  read_solver_options(f, "solver_options", c.solver_opts);
  f.get("sweep_axis", c.sweep_axis);
  f.finish();
  c.validate();
  return c;
}

GfraConfig gfra_config_from_json(const json& j) {
  GfraConfig c;
  Fields f(j, "params");
  f.get("M", c.M);
  f.get("n_h", c.n_h);
  f.get("sector_min_deg", c.sector_min_deg);
  f.get("sector_max_deg", c.sector_max_deg);
  f.get("tau_p", c.tau_p);
  f.get_list("device_counts", c.device_counts);
  f.get_extended("sinr_threshold_db", c.sinr_threshold_db);
  f.get_enum_list("schemes", c.schemes, parse_beam_scheme);
  f.get("grid_beams", c.grid_beams);
  f.get("groups", c.groups);
  f.get("ris_distance_m", c.ris_distance_m);
  f.get("device_min_m", c.device_min_m);
  f.get("device_max_m", c.device_max_m);
  f.get("reference_gain_db", c.reference_gain_db);
  f.get("bs_ris_exponent", c.bs_ris_exponent);
  f.get("ris_ue_exponent", c.ris_ue_exponent);
  f.get("kappa", c.kappa);
  f.get("bs_ris_los_only", c.bs_ris_los_only);
  f.get("device_power_dbm", c.device_power_dbm);
  f.get("dl_power_dbm", c.dl_power_dbm);
  f.get("noise_dbm", c.noise_dbm);
  if (const json* m = f.sub("mask")) {
    Fields g(*m, f.child("mask"));
    g.get("grid_size", c.mask.grid_size);
    g.get("in_band_weight", c.mask.in_band_weight);
    g.get("out_band_weight", c.mask.out_band_weight);
    g.get("efficiency", c.mask.efficiency);
    g.get("guard_fraction", c.mask.guard_fraction);
    g.get("restarts", c.mask.restarts);
    g.get("jitter_rad", c.mask.jitter_rad);
    g.get("seed", c.mask.seed);
    read_solver_options(g, "solver_options", c.mask.solver);
    g.finish();
  }
  f.finish();
  c.validate();
  return c;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json canon = {{"app", to_string(cfg.app)},
                {"trials", cfg.trials},
                {"base_seed", cfg.base_seed},
                {"params", cfg.params}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon.dump())));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<Index>(i);
  }
  throw Error("no CSV column named '" + name + "'");
}

void write_csv(const CsvTable& table, std::ostream& os) {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << csv_field(cells[i]);
    }
    os << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

void write_csv_file(const CsvTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(table, out);
  if (!out) throw Error("failed writing '" + path + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const AppRunner runner = make_runner(cfg);
  const std::string hash = config_hash(cfg);

  struct Slot {
    Rows rows;
    std::string error;
    bool failed = false;
  };
  std::vector<Slot> slots(cfg.trials);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
      try {
        slots[t].rows = runner.run(t, seed);
      } catch (const std::exception& e) {
        slots[t].failed = true;
        slots[t].error = e.what();
      }
    }
  };
  const int workers = std::min(cfg.parallel, cfg.trials);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  res.table.header = {"header_version", "config_hash", "seed"};
  for (const auto& c : runner.columns) res.table.header.push_back(c);
  for (int t = 0; t < cfg.trials; ++t) {
    if (slots[t].failed) {
      res.failures.push_back({t, slots[t].error});
      continue;
    }
    const std::string seed = std::to_string(cfg.base_seed + static_cast<std::uint64_t>(t));
    for (auto& r : slots[t].rows) {
      std::vector<std::string> row{std::to_string(kCsvHeaderVersion), hash, seed};
      for (auto& cell : r) row.push_back(std::move(cell));
      res.table.rows.push_back(std::move(row));
    }
  }
  res.summary = summarize(res.table, runner.group_by, runner.metrics);
  return res;
}

ExperimentResult run_sweep(const ExperimentConfig& base, const std::string& param,
                           const std::vector<json>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (param.empty()) throw ConfigError("sweep needs a parameter name");
  ExperimentResult all;
  std::vector<std::string> group_by;
  std::vector<std::string> metrics;
  for (const json& v : values) {
    ExperimentConfig cfg = base;
    set_dotted(cfg.params, param, v);
    if (!cfg.params.contains("sweep_axis")) {
      static const std::map<std::string, std::string> app2_axes{
          {"N", "n_elements"}, {"noise_dbm", "noise_power"}, {"se_targets", "min_se"}};
      static const std::map<std::string, std::string> app3_axes{
          {"M", "M"}, {"R", "K"}, {"tau_p", "K"}};
      if (cfg.app == AppKind::App2 && app2_axes.count(param)) cfg.params["sweep_axis"] = app2_axes.at(param);
      if (cfg.app == AppKind::App3 && app3_axes.count(param)) cfg.params["sweep_axis"] = app3_axes.at(param);
    }
    ExperimentResult r = run_experiment(cfg);
    if (all.table.header.empty()) {
      all.table.header = r.table.header;
      all.table.header.push_back("sweep_param");
      all.table.header.push_back("sweep_param_value");
    }
    const std::string text = value_text(v);
    for (auto& row : r.table.rows) {
      row.push_back(param);
      row.push_back(text);
      all.table.rows.push_back(std::move(row));
    }
    for (auto& f : r.failures) {
      f.message = param + "=" + text + ": " + f.message;
      all.failures.push_back(std::move(f));
    }
  }
  const AppRunner probe = make_runner(base);
  group_by = probe.group_by;
  group_by.push_back("sweep_param_value");
  all.summary = summarize(all.table, group_by, probe.metrics);
  return all;
}

std::vector<json> parse_value_list(const std::string& csv) {
  std::vector<json> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty entry in value list '" + csv + "'");
    item = item.substr(b, e - b + 1);
    char* end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (end && *end == '\0') {
      if (std::floor(d) == d && std::abs(d) < 9e15 && item.find_first_of(".eE") == std::string::npos) {
        out.emplace_back(static_cast<long long>(d));
      } else {
        out.emplace_back(d);
      }
    } else if (item == "true" || item == "false") {
      out.emplace_back(item == "true");
    } else {
      out.emplace_back(item);
    }
  }
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

void print_summary(const ExperimentResult& result, std::ostream& os) {
  for (const auto& s : result.summary) {
    os << s.group << "  " << s.metric << ": " << format_double(s.mean) << " +- "
       << format_double(s.half_width) << " (n=" << s.count << ")\n";
  }
  for (const auto& f : result.failures) {
    os << "trial " << f.trial << " failed: " << f.message << '\n';
  }
}

CsvTable pattern_table(const GfraConfig& cfg, const GfraDeployment& dep, int points) {
  if (points < 2) throw ConfigError("pattern export needs at least two angles");
  CsvTable t;
  t.header = {"header_version", "scheme", "config", "angle_deg", "gain_db"};
  const double n2 = static_cast<double>(cfg.n_h) * static_cast<double>(cfg.n_h);
  for (BeamScheme s : {BeamScheme::Single, BeamScheme::Multi}) {
    const BeamSchedule& sched = dep.schedule(s);
    for (int c = 0; c < sched.num_configs(); ++c) {
      for (int i = 0; i < points; ++i) {
        const double deg = 180.0 * i / (points - 1);
        const double g = pattern_gain(sched.configs[c], deg * kPi / 180.0) / n2;
        t.rows.push_back({std::to_string(kCsvHeaderVersion), to_string(s), std::to_string(c),
                          format_double(deg), format_double(10.0 * std::log10(std::max(g, 1e-30)))});
      }
    }
  }
  return t;
}

}  // namespace mris
