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

#include "mris/random_access.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>

#include "mris/channel.hpp"
#include "mris/pilot_reuse.hpp"

namespace mris {
namespace {

double deg(double d) { return d * kPi / 180.0; }

// BS-side departure angle of the BS-RIS line-of-sight component.
constexpr double kBsDeparture = kPi / 3.0;

int argmax(const RVector& v, Index from, Index count) {
  Index best = from;
  for (Index i = from + 1; i < from + count; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<int>(best - from);
}

}  // namespace

CVector steering_from_cosine(Index n, double u) {
  CVector a(n);
  for (Index i = 0; i < n; ++i) a[i] = std::polar(1.0, kPi * static_cast<double>(i) * u);
  return a;
}

double pattern_gain(const CVector& theta, double angle_rad) {
  return std::norm(ula_steering(theta.size(), angle_rad).transpose().dot(theta.conjugate()));
}

RVector pattern(const CVector& theta, const RVector& angles_rad) {
  RVector out(angles_rad.size());
  for (Index i = 0; i < angles_rad.size(); ++i) out[i] = pattern_gain(theta, angles_rad[i]);
  return out;
}

DftCodebook dft_beam_codebook(Index n_h, double sector_min_deg, double sector_max_deg) {
  if (n_h < 1) throw ConfigError("codebook size must be positive");
  if (!(sector_min_deg >= 0.0 && sector_max_deg <= 180.0 && sector_min_deg < sector_max_deg)) {
    throw ConfigError("sector must satisfy 0 <= min < max <= 180 degrees");
  }
  DftCodebook cb;
  cb.cosines.resize(n_h);
  const double u_lo = std::cos(deg(sector_max_deg));
  const double u_hi = std::cos(deg(sector_min_deg));
  constexpr double kEdge = 1e-12;
  for (Index b = 0; b < n_h; ++b) {
    const double u = static_cast<double>(2 * b - n_h + 1) / static_cast<double>(n_h);
    cb.cosines[b] = u;
    cb.beams.push_back(steering_from_cosine(n_h, u).conjugate());
    if (u >= u_lo - kEdge && u <= u_hi + kEdge) cb.in_sector.push_back(static_cast<int>(b));
  }
  return cb;
}

MaskFitModel::MaskFitModel(Index n, const RVector& angles_rad, RVector target, RVector weights)
    : n_(n), A_(angles_rad.size(), n), target_(std::move(target)), weights_(std::move(weights)) {
  if (target_.size() != angles_rad.size() || weights_.size() != angles_rad.size()) {
    throw DimensionError("mask target and weights must match the angle grid");
  }
  for (Index i = 0; i < angles_rad.size(); ++i) A_.row(i) = ula_steering(n, angles_rad[i]).transpose();
}

double MaskFitModel::value(const CVector& theta) const {
  if (theta.size() != n_) throw DimensionError("theta length differs from RIS size");
  const RVector r = (A_ * theta).cwiseAbs2() - target_;
  return weights_.dot(r.cwiseAbs2());
}

CVector MaskFitModel::egrad(const CVector& theta) const {
  if (theta.size() != n_) throw DimensionError("theta length differs from RIS size");
  const CVector s = A_ * theta;
  const RVector r = s.cwiseAbs2() - target_;
  const CVector c = (4.0 * weights_.cwiseProduct(r)).cast<Complex>().cwiseProduct(s);
  // sum_i c_i conj(a_i)
  return A_.adjoint() * c;
}

Problem mask_fit_problem(const MaskFitModel& model, double scale) {
  Problem p{Manifold::complex_circle(model.num_elements()), {}, {}, Sense::Minimize};
  const double inv = 1.0 / scale;
  p.cost = [&model, inv](const ManifoldPoint& x) { return inv * model.value(x.ambient()); };
  p.egrad = [&model, inv](const ManifoldPoint& x) { return CVector(inv * model.egrad(x.ambient())); };
  return p;
}

CVector naive_multibeam(Index n, const std::vector<double>& centers_rad) {
  if (centers_rad.empty()) throw Error("naive multi-beam needs at least one direction");
  CVector sum = CVector::Zero(n);
  for (double c : centers_rad) sum += ula_steering(n, c).conjugate();
  CVector out(n);
  for (Index i = 0; i < n; ++i) {
    out[i] = std::abs(sum[i]) > 0.0 ? sum[i] / std::abs(sum[i]) : Complex(1.0, 0.0);
  }
  return out;
}

MultibeamDesign multibeam_design(Index n, const std::vector<double>& centers_rad,
                                 double half_width_rad, double sector_min_deg,
                                 double sector_max_deg, const MaskFitOptions& opts) {
  if (centers_rad.empty()) throw Error("multi-beam design needs at least one intended beam");
  if (opts.grid_size < 2) throw ConfigError("mask grid needs at least two points");
  const double lo = deg(sector_min_deg);
  const double hi = deg(sector_max_deg);
  const int G = opts.grid_size;

  RVector angles(G);
  std::vector<bool> in_band(G, false);
  std::vector<bool> guard(G, false);
  const double guard_edge = half_width_rad * (1.0 + opts.guard_fraction);
  for (int i = 0; i < G; ++i) {
    angles[i] = lo + (i + 0.5) * (hi - lo) / G;
    for (double c : centers_rad) {
      const double d = std::abs(angles[i] - c);
      if (d <= half_width_rad) in_band[i] = true;
      if (d <= guard_edge) guard[i] = true;
    }
  }
  double width = 0.0;
  for (double c : centers_rad) {
    const double a = std::clamp(c - half_width_rad, lo, hi);
    const double b = std::clamp(c + half_width_rad, lo, hi);
    width += std::abs(std::cos(a) - std::cos(b));
  }
  const double nn = static_cast<double>(n);
  const double high = width > 0.0 ? std::min(opts.efficiency * 2.0 * nn / width, nn * nn) : nn * nn;

  RVector target(G), weights(G);
  for (int i = 0; i < G; ++i) {
    target[i] = in_band[i] ? high : 0.0;
    weights[i] = in_band[i] ? opts.in_band_weight : (guard[i] ? 0.0 : opts.out_band_weight);
  }
  const MaskFitModel model(n, angles, target, weights);
  const double scale = weights.dot(target.cwiseAbs2());
  if (opts.guard_fraction < 0.0) throw ConfigError("guard_fraction must be non-negative");
  const Problem prob = mask_fit_problem(model, scale > 0.0 ? scale : 1.0);
  SolverOptions so = opts.solver;
  so.record_time = false;
  const CVector naive = naive_multibeam(n, centers_rad);
  SolverResult best = solve_rcg(prob, ManifoldPoint(prob.manifold, naive), so);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> jitter(-opts.jitter_rad, opts.jitter_rad);
  for (int r = 0; r < opts.restarts; ++r) {
    CVector start = naive;
    for (Index i = 0; i < n; ++i) start[i] *= std::polar(1.0, jitter(rng));
    SolverResult res = solve_rcg(prob, ManifoldPoint(prob.manifold, start), so);
    if (res.trace.final_cost() < best.trace.final_cost()) best = std::move(res);
  }

  MultibeamDesign out;
  out.theta = best.point.ambient();
  out.status = best.trace.status;
  const RVector gain = pattern(out.theta, angles);
  double in_sum = 0.0, out_sum = 0.0;
  int in_count = 0, out_count = 0;
  out.in_band_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < G; ++i) {
    if (in_band[i]) {
      in_sum += gain[i];
      ++in_count;
      out.in_band_min = std::min(out.in_band_min, gain[i]);
    } else if (!guard[i]) {
      out_sum += gain[i];
      ++out_count;
    }
  }
  out.in_band_mean = in_count > 0 ? in_sum / in_count : 0.0;
  out.out_band_mean = out_count > 0 ? out_sum / out_count : 0.0;
  out.below_spec = out.in_band_min < 0.6 * out.in_band_mean ||
                   out.out_band_mean > 0.15 * out.in_band_mean;
  return out;
}

std::string to_string(BeamScheme s) { return s == BeamScheme::Single ? "single_beam" : "multi_beam"; }

BeamScheme parse_beam_scheme(const std::string& name) {
  if (name == "single_beam" || name == "single") return BeamScheme::Single;
  if (name == "multi_beam" || name == "multi") return BeamScheme::Multi;
  throw ConfigError("unknown scheme '" + name + "' (expected single_beam or multi_beam)");
}

void GfraConfig::validate() const {
  if (M < 1 || n_h < 1) throw ConfigError("M and n_h must be positive");
  if (!(sector_min_deg >= 0.0 && sector_max_deg <= 180.0 && sector_min_deg < sector_max_deg)) {
    throw ConfigError("sector must satisfy 0 <= min < max <= 180 degrees");
  }
  if (tau_p < 1) throw ConfigError("tau_p must be positive");
  if (device_counts.empty()) throw ConfigError("device_counts must not be empty");
  for (int n : device_counts) {
    if (n < 1) throw ConfigError("device counts must be positive");
  }
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  if (groups < 1 || grid_beams != groups * groups) {
    throw ConfigError("grid_beams must equal groups * groups");
  }
  if (!(ris_distance_m > 0.0 && device_min_m > 0.0 && device_max_m >= device_min_m)) {
    throw ConfigError("distances must be positive with device_min_m <= device_max_m");
  }
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be non-negative");
}

BeamSchedule build_schedule(BeamScheme kind, const DftCodebook& codebook, const GfraConfig& cfg) {
  cfg.validate();
  BeamSchedule s;
  s.kind = kind;
  if (codebook.in_sector.empty()) throw ConfigError("no DFT beam falls inside the sector");
  if (kind == BeamScheme::Single) {
    for (std::size_t i = 0; i < codebook.in_sector.size(); ++i) {
      const int b = codebook.in_sector[i];
      s.configs.push_back(codebook.beams[b]);
      s.intended.push_back({static_cast<int>(i)});
      s.beam_angles.push_back(codebook.angle(b));
      s.access_beam.push_back(b);
    }
    return s;
  }

  const double lo = deg(cfg.sector_min_deg);
  const double hi = deg(cfg.sector_max_deg);
  const double step = (hi - lo) / cfg.grid_beams;
  s.groups = cfg.groups;
  for (int j = 0; j < cfg.grid_beams; ++j) {
    const double phi = lo + (j + 0.5) * step;
    s.beam_angles.push_back(phi);
    int best = codebook.in_sector.front();
    for (int b : codebook.in_sector) {
      if (std::abs(codebook.cosines[b] - std::cos(phi)) <
          std::abs(codebook.cosines[best] - std::cos(phi))) {
        best = b;
      }
    }
    s.access_beam.push_back(best);
  }
  auto add = [&](const std::vector<int>& members) {
    std::vector<double> centers;
    for (int j : members) centers.push_back(s.beam_angles[j]);
    const MultibeamDesign d =
        multibeam_design(cfg.n_h, centers, 0.5 * step, cfg.sector_min_deg, cfg.sector_max_deg, cfg.mask);
    if (d.below_spec) ++s.below_spec;
    s.configs.push_back(d.theta);
    s.intended.push_back(members);
  };
  for (int c = 0; c < cfg.groups; ++c) {
    std::vector<int> members;
    for (int j = 0; j < cfg.grid_beams; ++j) {
      if (j / cfg.groups == c) members.push_back(j);
    }
    add(members);
  }
  for (int i = 0; i < cfg.groups; ++i) {
    std::vector<int> members;
    for (int j = 0; j < cfg.grid_beams; ++j) {
      if (j % cfg.groups == i) members.push_back(j);
    }
    add(members);
  }
  return s;
}

int decode_multibeam(int consecutive, int interleaved, int groups) {
  if (consecutive < 0 || consecutive >= groups || interleaved < 0 || interleaved >= groups) {
    throw DimensionError("group index out of range");
  }
  return consecutive * groups + interleaved;
}

SoundingDecision choose_beam(const BeamSchedule& schedule, const RVector& measured,
                             std::uint64_t seed) {
  if (measured.size() != schedule.num_configs()) {
    throw DimensionError("one measurement per sounding configuration expected");
  }
  SoundingDecision d;
  if (!(measured.maxCoeff() > 0.0)) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(schedule.beam_angles.size()) - 1);
    d.beam = pick(rng);
    d.low_confidence = true;
    return d;
  }
  if (schedule.kind == BeamScheme::Single) {
    d.beam = argmax(measured, 0, measured.size());
  } else {
    const int g = schedule.groups;
    d.beam = decode_multibeam(argmax(measured, 0, g), argmax(measured, g, g), g);
  }
  return d;
}

double singleton_oracle(int n, const std::vector<double>& probs) {
  double e = 0.0;
  for (double p : probs) e += n * p * std::pow(1.0 - p, n - 1);
  return e;
}

std::vector<double> resource_probabilities(const BeamSchedule& schedule, const DftCodebook& codebook,
                                           const GfraConfig& cfg) {
  const double lo = deg(cfg.sector_min_deg);
  const double hi = deg(cfg.sector_max_deg);
  std::map<int, double> beam_prob;
  for (int b : codebook.in_sector) beam_prob[b] = 0.0;
  if (schedule.kind == BeamScheme::Single) {
    // Nearest pointing cosine wins; cells are bounded by cosine midpoints.
    const auto& in = codebook.in_sector;
    for (std::size_t i = 0; i < in.size(); ++i) {
      double u_hi = i + 1 < in.size() ? 0.5 * (codebook.cosines[in[i]] + codebook.cosines[in[i + 1]])
                                      : std::cos(lo);
      double u_lo = i > 0 ? 0.5 * (codebook.cosines[in[i - 1]] + codebook.cosines[in[i]]) : std::cos(hi);
      u_hi = std::clamp(u_hi, std::cos(hi), std::cos(lo));
      u_lo = std::clamp(u_lo, std::cos(hi), std::cos(lo));
      beam_prob[in[i]] = (std::acos(u_lo) - std::acos(u_hi)) / (hi - lo);
    }
  } else {
    const double each = 1.0 / static_cast<double>(schedule.access_beam.size());
    for (int b : schedule.access_beam) beam_prob[b] += each;
  }
  std::vector<double> out;
  for (const auto& [b, q] : beam_prob) {
    for (int i = 0; i < cfg.tau_p; ++i) out.push_back(q / cfg.tau_p);
  }
  return out;
}

GfraDeployment prepare_gfra(const GfraConfig& cfg) {
  cfg.validate();
  GfraDeployment dep;
  dep.codebook = dft_beam_codebook(cfg.n_h, cfg.sector_min_deg, cfg.sector_max_deg);
  dep.single = build_schedule(BeamScheme::Single, dep.codebook, cfg);
  dep.multi = build_schedule(BeamScheme::Multi, dep.codebook, cfg);
  return dep;
}

std::vector<GfraRow> run_gfra_trial(const GfraConfig& cfg, const GfraDeployment& dep,
                                    int device_count, int trial, std::uint64_t seed) {
  cfg.validate();
  if (device_count < 1) throw ConfigError("device_count must be positive");
  const Index M = cfg.M;
  const Index N = cfg.n_h;
  const double lo = deg(cfg.sector_min_deg);
  const double hi = deg(cfg.sector_max_deg);
  const double p = dbm_to_mw(cfg.device_power_dbm);
  const double p_dl = dbm_to_mw(cfg.dl_power_dbm);
  const double noise = dbm_to_mw(cfg.noise_dbm);
  const double threshold = db_to_linear(cfg.sinr_threshold_db);
  const int access_slots = static_cast<int>(dep.codebook.in_sector.size());
  const double resources = static_cast<double>(access_slots * cfg.tau_p);

  // Drop devices and draw channels.
  std::mt19937_64 rng(derive_seed(seed, 1, static_cast<std::uint64_t>(device_count)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<CVector> h_r;
  for (int k = 0; k < device_count; ++k) {
    const double phi = lo + (hi - lo) * unit(rng);
    const double d = cfg.device_min_m + (cfg.device_max_m - cfg.device_min_m) * unit(rng);
    const double amp = link_amplitude(cfg.reference_gain_db, d, cfg.ris_ue_exponent);
    h_r.push_back(amp * std::polar(1.0, 2.0 * kPi * unit(rng)) * ula_steering(N, phi));
  }
  const double amp_g = link_amplitude(cfg.reference_gain_db, cfg.ris_distance_m, cfg.bs_ris_exponent);
  const CVector a_bs = ula_steering(M, kBsDeparture);
  CMatrix G = a_bs * CVector::Ones(N).transpose();
  if (!cfg.bs_ris_los_only) {
    CMatrix scatter(M, N);
    for (Index j = 0; j < N; ++j) {
      for (Index i = 0; i < M; ++i) scatter(i, j) = Complex(gauss(rng), gauss(rng));
    }
    G = std::sqrt(cfg.kappa / (cfg.kappa + 1.0)) * G + std::sqrt(1.0 / (cfg.kappa + 1.0)) * scatter;
  }
  G *= amp_g;
  std::uniform_int_distribution<int> pick_pilot(0, cfg.tau_p - 1);
  std::vector<int> pilot(device_count);
  for (int& i : pilot) i = pick_pilot(rng);

  // Downlink sounding with the BS beam locked on the line-of-sight direction.
  const CVector g_eff = G.adjoint() * a_bs / std::sqrt(static_cast<double>(M));
  const CMatrix pilots = dft_pilots(cfg.tau_p);
  std::normal_distribution<double> meas(0.0, std::sqrt(noise / 2.0));

  std::vector<GfraRow> rows;
  for (BeamScheme scheme : cfg.schemes) {
    const BeamSchedule& sched = dep.schedule(scheme);
    const std::uint64_t tag = scheme == BeamScheme::Single ? 10 : 20;
    std::mt19937_64 srng(derive_seed(seed, tag, static_cast<std::uint64_t>(device_count)));

    std::vector<int> beam(device_count);
    for (int k = 0; k < device_count; ++k) {
      RVector measured(sched.num_configs());
      for (int c = 0; c < sched.num_configs(); ++c) {
        const Complex y = std::sqrt(p_dl) * g_eff.dot(sched.configs[c].cwiseProduct(h_r[k])) +
                          Complex(meas(srng), meas(srng));
        measured[c] = std::norm(y);
      }
      const SoundingDecision d = choose_beam(sched, measured, derive_seed(seed, tag + 1, k));
      beam[k] = sched.access_beam[d.beam];
    }

    std::map<int, std::vector<int>> slots;
    for (int k = 0; k < device_count; ++k) slots[beam[k]].push_back(k);

    int successes = 0;
    double se_sum = 0.0;
    for (const auto& [b, members] : slots) {
      const CVector& theta = dep.codebook.beams[b];
      CMatrix H(M, static_cast<Index>(members.size()));
      for (std::size_t j = 0; j < members.size(); ++j) {
        H.col(j) = G * theta.cwiseProduct(h_r[members[j]]);
      }
      CMatrix Y(M, cfg.tau_p);
      for (Index j = 0; j < Y.cols(); ++j) {
        for (Index i = 0; i < M; ++i) Y(i, j) = Complex(meas(srng), meas(srng));
      }
      const double amp = std::sqrt(cfg.tau_p * p);
      std::vector<int> load(cfg.tau_p, 0);
      for (std::size_t j = 0; j < members.size(); ++j) {
        const int i = pilot[members[j]];
        Y.noalias() += amp * H.col(j) * pilots.col(i).adjoint();
        ++load[i];
      }
      const CMatrix est = estimate_channels_ls(Y, pilots, p);
      for (std::size_t j = 0; j < members.size(); ++j) {
        const int i = pilot[members[j]];
        if (load[i] != 1) continue;
        const CVector v = est.col(i);
        const double signal = p * std::norm(v.dot(H.col(j)));
        double interference = noise * v.squaredNorm();
        for (std::size_t q = 0; q < members.size(); ++q) {
          if (q != j) interference += p * std::norm(v.dot(H.col(q)));
        }
        const double sinr = signal / interference;
        if (sinr >= threshold) {
          ++successes;
          se_sum += std::log2(1.0 + sinr);
        }
      }
    }
    GfraRow row;
    row.scheme = to_string(scheme);
    row.device_count = device_count;
    row.trial = trial;
    row.successes = successes;
    row.throughput = successes / resources;
    row.sum_se_bpcu = se_sum / static_cast<double>(sched.num_configs() + access_slots);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mris
