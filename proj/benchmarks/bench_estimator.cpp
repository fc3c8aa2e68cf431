#include <benchmark/benchmark.h>

#include "stkern/covariance.hpp"
#include "stkern/simulation.hpp"

using namespace stkern;

namespace {

FittedModel make_model(int n, int p) {
  SimConfig config;
  config.n = n;
  config.p = p;
  config.seed = 1;
  const auto sim = generate(config);
  const auto ds = build_dataset(sim, Scenario::S1, 0, n);
  return fit(ds, BasisSet::build(2, 6), TypeIKernel{},
             BandwidthConfig{0.25, ScalingWeights::Geometric(0.9)}, 6);
}

void BM_Fit(benchmark::State& state) {
  SimConfig config;
  config.n = static_cast<int>(state.range(0));
  config.p = 15;
  config.seed = 1;
  const auto sim = generate(config);
  const auto ds = build_dataset(sim, Scenario::S1, 0, config.n);
  const auto basis = BasisSet::build(2, 6);
  CoverCache cache;
  FitOptions options;
  options.covers.assign(ds.records.size(), cache.get(sim.locations, 2));
  for (auto _ : state)
    benchmark::DoNotOptimize(fit(ds, basis, TypeIKernel{},
                                 BandwidthConfig{0.25, ScalingWeights::Geometric(0.9)}, 6,
                                 options));
}
BENCHMARK(BM_Fit)->Arg(50)->Arg(100)->Arg(200);

void BM_MuSurface(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)), 15);
  const CovariateVector query{2.0};
  const SpatialPoint s{0.3, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(mu_surface(model, query, s));
}
BENCHMARK(BM_MuSurface)->Arg(100)->Arg(400);

void BM_CovarianceMatrix(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)), 15);
  const CovariateVector query{2.0};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_covariance(model, query, 6));
}
BENCHMARK(BM_CovarianceMatrix)->Arg(100)->Arg(400);

}  // namespace
