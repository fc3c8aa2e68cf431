#include <benchmark/benchmark.h>

#include "stkern/covariance.hpp"

using namespace stkern;

namespace {

void BM_Gram(benchmark::State& state) {
  const auto basis = BasisSet::build(2, 6);
  for (auto _ : state) benchmark::DoNotOptimize(basis.gram(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Gram)->Arg(8)->Arg(16);

void BM_CSystem(benchmark::State& state) {
  const auto basis = BasisSet::build(2, 6);
  const auto corr = SpatialCorrelation::GaussianDecay(1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(build_c_system(basis, corr, 6, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_CSystem)->Arg(8)->Arg(12);

}  // namespace
