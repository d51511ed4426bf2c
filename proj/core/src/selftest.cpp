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

#include "mris/selftest.hpp"

#include <algorithm>
#include <random>

#include "mris/beamforming.hpp"
#include "mris/energy.hpp"
#include "mris/fairness.hpp"
#include "mris/pilot_reuse.hpp"
#include "mris/random_access.hpp"

namespace mris {
namespace {

CVector gaussian(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

SelfCheck at_most(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

ChannelSet small_channels(Index m, Index n, int k, std::uint64_t seed) {
  SystemGeometry geom = ris_semicircle_geometry(k, 20.0, 100.0);
  const FadingConfig fading{FadingModel::Rician, 5.0, AngleModel::RandomUniform,
                            BsRisStructure::PerElement, true};
  ChannelSet ch = sample_channels(geom, fading, m, n, seed);
  ch.noise_power_mw = dbm_to_mw(-100.0);
  return ch;
}

}  // namespace

std::vector<SelfCheck> manifold_property_checks(int cases, std::uint64_t seed) {
  const std::vector<Manifold> kinds{
      Manifold::complex_circle(8), Manifold::stiefel(5, 2),
      Manifold::product({Manifold::complex_circle(3), Manifold::stiefel(4, 2)})};
  std::vector<SelfCheck> out;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const Manifold& m = kinds[k];
    std::mt19937_64 rng(derive_seed(seed, 1, k));
    double idem = 0.0, tang = 0.0, feas = 0.0, orth = 0.0;
    int growth = 0;
    for (int c = 0; c < cases; ++c) {
      const ManifoldPoint x(m, m.random(rng));
      const CVector v = gaussian(m.ambient_size(), rng);
      const CVector pv = m.project(x.ambient(), v);
      idem = std::max(idem, (m.project(x.ambient(), pv) - pv).cwiseAbs().maxCoeff());
      tang = std::max(tang, m.tangent_error(x.ambient(), pv));
      const TangentVector t = project_tangent(x, v);
      feas = std::max(feas, m.point_error(retract(x, t).ambient()));
      const TangentVector w = project_tangent(x, gaussian(m.ambient_size(), rng));
      // <P v, w> = <v, w> for tangent w
      orth = std::max(orth, std::abs(inner(t, w) - (v.adjoint() * w.ambient())(0).real()));
      const TangentVector u = t.scaled(1.0 / norm(t));
      double prev = std::numeric_limits<double>::infinity();
      for (double h : {1e-2, 1e-3, 1e-4}) {
        const double ratio =
            (retract(x, u.scaled(h)).ambient() - (x.ambient() + h * u.ambient())).norm() / (h * h);
        if (ratio > prev * 1.05 + 1e-6) ++growth;
        prev = ratio;
      }
    }
    const std::string tag = m.describe() + ": ";
    out.push_back(at_most(tag + "projection idempotence", idem, 1e-12));
    out.push_back(at_most(tag + "tangency", tang, 1e-10));
    out.push_back(at_most(tag + "retraction feasibility", feas, 1e-10));
    out.push_back(at_most(tag + "retraction locality growth count", growth, 0.0));
    out.push_back(at_most(tag + "projection orthogonality", orth, 1e-10));
  }
  return out;
}

std::vector<SelfCheck> objective_gradient_checks(int points, std::uint64_t seed) {
  constexpr double kTol = 1e-5;
  constexpr double kStep = 1e-5;
  std::vector<SelfCheck> out;
  double worst[4] = {0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < points; ++i) {
    const std::uint64_t s = derive_seed(seed, 2, i);
    {
      const ChannelSet ch = small_channels(8, 12, 4, s);
      const TraceInverseModel model(ch);
      const Manifold ccm = Manifold::complex_circle(12);
      const ManifoldPoint x = random_point(ccm, derive_seed(s, 1));
      const Problem p = trace_inverse_problem(model, model.value(x.ambient()));
      worst[0] = std::max(worst[0], gradient_check(p, x, 6, kStep, derive_seed(s, 2)));
    }
    {
      const ChannelSet ch = small_channels(6, 10, 3, s);
      const ManifoldPoint x = random_point(Manifold::complex_circle(10), derive_seed(s, 3));
      const CMatrix H = ch.composite_matrix(x.ambient());
      const RVector p = RVector::Constant(3, 1.0);
      const CMatrix W = mmse_combiner(H, p, ch.noise_power_mw);
      const RVector lambda = RVector::LinSpaced(3, 0.5, 1.5);
      const EeThetaModel model(ch, W, p, lambda, ch.noise_power_mw);
      const Problem prob = ee_theta_problem(model, model.value(x.ambient()));
      worst[1] = std::max(worst[1], gradient_check(prob, x, 6, kStep, derive_seed(s, 4)));
    }
    {
      PilotConfig cfg;
      cfg.R = 1;
      cfg.tau_p = 2;
      cfg.M = 6;
      cfg.N = 10;
      const PilotScenario sc = build_pilot_scenario(cfg, derive_seed(s, 5));
      const FadingConfig fading{FadingModel::Rician, cfg.kappa, AngleModel::Geometric,
                                BsRisStructure::RankOne, true};
      const ChannelSet ch = sample_channels(sc.geometry, fading, cfg.M, cfg.N, derive_seed(s, 6));
      const StatisticalCsi stat = statistical_csi(sc.geometry, ch, cfg.kappa);
      const StatisticalGainModel model(stat, 0, {0, 1});
      const ManifoldPoint x = random_point(Manifold::complex_circle(cfg.N), derive_seed(s, 7));
      const Problem prob = statistical_gain_problem(model, model.value(x.ambient()));
      worst[2] = std::max(worst[2], gradient_check(prob, x, 6, kStep, derive_seed(s, 8)));
    }
    {
      const Index n = 16;
      const int g = 64;
      RVector angles(g), target(g), weights(g);
      for (int j = 0; j < g; ++j) {
        angles[j] = kPi * (j + 0.5) / g;
        const bool in = j >= 20 && j < 28;
        target[j] = in ? 40.0 : 0.0;
        weights[j] = in ? 1.0 : 4.0;
      }
      const MaskFitModel model(n, angles, target, weights);
      const ManifoldPoint x = random_point(Manifold::complex_circle(n), derive_seed(s, 9));
      const Problem prob = mask_fit_problem(model, weights.dot(target.cwiseAbs2()));
      worst[3] = std::max(worst[3], gradient_check(prob, x, 6, kStep, derive_seed(s, 10)));
    }
  }
  out.push_back(at_most("gradient check: trace inverse", worst[0], kTol));
  out.push_back(at_most("gradient check: weighted sum SINR", worst[1], kTol));
  out.push_back(at_most("gradient check: statistical gain", worst[2], kTol));
  out.push_back(at_most("gradient check: mask fit", worst[3], kTol));
  return out;
}

std::vector<SelfCheck> solver_oracle_checks(int seeds, std::uint64_t seed) {
  constexpr Index n = 16;
  double worst_rgd = 0.0, worst_rcg = 0.0, worst_rise = 0.0;
  auto rise = [](const SolverTrace& t) {
    double r = 0.0;
    for (std::size_t i = 1; i < t.records.size(); ++i) {
      r = std::max(r, t.records[i].cost - t.records[i - 1].cost);
    }
    return r;
  };
  for (int i = 0; i < seeds; ++i) {
    std::mt19937_64 rng(derive_seed(seed, 3, i));
    CMatrix B(n, n);
    for (Index c = 0; c < n; ++c) B.col(c) = gaussian(n, rng);
    const CMatrix A = 0.5 * (B + B.adjoint());
    const double lambda_min = Eigen::SelfAdjointEigenSolver<CMatrix>(A).eigenvalues()[0];
    Problem p{Manifold::stiefel(n, 1), {}, {}, Sense::Minimize};
    p.cost = [&A](const ManifoldPoint& x) { return (x.ambient().adjoint() * A * x.ambient())(0).real(); };
    p.egrad = [&A](const ManifoldPoint& x) { return CVector(2.0 * A * x.ambient()); };
    SolverOptions opts;
    opts.max_iters = 20000;
    opts.grad_tol = 1e-9;
    opts.record_time = false;
    const ManifoldPoint x0 = random_point(p.manifold, derive_seed(seed, 4, i));
    const SolverTrace a = solve_rgd(p, x0, opts).trace;
    const SolverTrace b = solve_rcg(p, x0, opts).trace;
    worst_rgd = std::max(worst_rgd, std::abs(a.final_cost() - lambda_min));
    worst_rcg = std::max(worst_rcg, std::abs(b.final_cost() - lambda_min));
    worst_rise = std::max({worst_rise, rise(a), rise(b)});
  }
  return {at_most("rayleigh quotient: rgd", worst_rgd, 1e-8),
          at_most("rayleigh quotient: rcg", worst_rcg, 1e-8),
          at_most("armijo trace: largest cost increase", worst_rise, 0.0)};
}

std::vector<SelfCheck> run_selftest(std::uint64_t seed) {
  std::vector<SelfCheck> all = manifold_property_checks(100, seed);
  for (auto& c : objective_gradient_checks(5, seed)) all.push_back(std::move(c));
  for (auto& c : solver_oracle_checks(5, seed)) all.push_back(std::move(c));
  return all;
}

}  // namespace mris
