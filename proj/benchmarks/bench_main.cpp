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

#include <benchmark/benchmark.h>

#include "mris/fairness.hpp"
#include "mris/manifold.hpp"
#include "mris/random_access.hpp"
#include "mris/solvers.hpp"

using namespace mris;

namespace {

ChannelSet app1_channels(Index n, std::uint64_t seed) {
  FairnessConfig cfg;
  const SystemGeometry g = ris_semicircle_geometry(static_cast<int>(cfg.K), cfg.radius_m, cfg.ris_distance_m);
  ChannelSet ch = sample_channels(g, cfg.fading, cfg.M, n, seed);
  ch.noise_power_mw = dbm_to_mw(cfg.noise_dbm);
  return ch;
}

void BM_CircleRetraction(benchmark::State& state) {
  const Index n = state.range(0);
  const ManifoldPoint x = random_point(Manifold::complex_circle(n), 1);
  const TangentVector v = project_tangent(x, random_point(Manifold::complex_circle(n), 2).ambient());
  for (auto _ : state) benchmark::DoNotOptimize(retract(x, v.scaled(0.1)));
}
BENCHMARK(BM_CircleRetraction)->Arg(32)->Arg(256)->Arg(1024);

void BM_StiefelRetraction(benchmark::State& state) {
  const Index m = state.range(0);
  const Manifold st = Manifold::stiefel(m, 8);
  const ManifoldPoint x = random_point(st, 1);
  const TangentVector v = project_tangent(x, random_point(st, 2).ambient());
  for (auto _ : state) benchmark::DoNotOptimize(retract(x, v.scaled(0.1)));
}
BENCHMARK(BM_StiefelRetraction)->Arg(16)->Arg(64)->Arg(128);

void BM_TraceInverseEgrad(benchmark::State& state) {
  const Index n = state.range(0);
  const TraceInverseModel model(app1_channels(n, 3));
  const CVector th = random_point(Manifold::complex_circle(n), 4).ambient();
  for (auto _ : state) benchmark::DoNotOptimize(model.egrad(th));
}
BENCHMARK(BM_TraceInverseEgrad)->Arg(32)->Arg(128);

void BM_RcgTraceInverse(benchmark::State& state) {
  const TraceInverseModel model(app1_channels(32, 5));
  const ManifoldPoint x0 = random_point(Manifold::complex_circle(32), 6);
  const Problem p = trace_inverse_problem(model, model.value(x0.ambient()));
  SolverOptions opts;
  opts.record_time = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve_rcg(p, x0, opts));
}
BENCHMARK(BM_RcgTraceInverse)->Unit(benchmark::kMillisecond);

void BM_GfraTrial(benchmark::State& state) {
  static const GfraConfig cfg;
  static const GfraDeployment dep = prepare_gfra(cfg);
  int t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_gfra_trial(cfg, dep, static_cast<int>(state.range(0)), t, t++));
}
BENCHMARK(BM_GfraTrial)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
