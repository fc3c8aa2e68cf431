#include <benchmark/benchmark.h>

#include "stkern/aggregation.hpp"

using namespace stkern;

namespace {

std::vector<SpatialPoint> grid(int p) {
  std::vector<SpatialPoint> locs;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      locs.push_back(SpatialPoint{static_cast<double>(i) / (p - 1),
                                  static_cast<double>(j) / (p - 1)});
  return locs;
}

void BM_EffectiveResolution(benchmark::State& state) {
  const auto locs = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(effective_resolution(locs, 2));
}
BENCHMARK(BM_EffectiveResolution)->Arg(5)->Arg(15)->Arg(30);

void BM_BuildCover(benchmark::State& state) {
  const auto locs = grid(static_cast<int>(state.range(0)));
  const double eps = effective_resolution(locs, 2);
  for (auto _ : state) benchmark::DoNotOptimize(build_cover(locs, eps, 2));
}
BENCHMARK(BM_BuildCover)->Arg(5)->Arg(15)->Arg(30);

void BM_AggregateAll(benchmark::State& state) {
  const auto locs = grid(static_cast<int>(state.range(0)));
  const auto basis = BasisSet::build(2, 6);
  const auto cover = build_cover(locs, effective_resolution(locs, 2), 2);
  std::vector<double> ys(locs.size());
  for (std::size_t j = 0; j < ys.size(); ++j)
    ys[j] = basis.eval(2, locs[j]) + 0.5 * basis.eval(6, locs[j]);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_all(locs, ys, cover, basis, 6));
}
BENCHMARK(BM_AggregateAll)->Arg(5)->Arg(15)->Arg(30);

}  // namespace
