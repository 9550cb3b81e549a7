// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include "obci/cip.hpp"
#include "obci/experiments.hpp"
#include "obci/limits.hpp"
#include "obci/subsampling.hpp"

using namespace obci;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_DrawLimits(benchmark::State& state) {
  LimitConfig c;
  c.method = static_cast<Procedure>(state.range(1));
  c.asym = {0.25, BatchCount::infinite(), 0.0};
  c.replications = 2000;
  c.grid = 1024;
  for (auto _ : state) benchmark::DoNotOptimize(draw_limits(c, mode(state)));
  state.SetItemsProcessed(state.iterations() * c.replications);
  label(state);
}
BENCHMARK(BM_DrawLimits)->ArgsProduct({{0, 1}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_BatchEstimates(benchmark::State& state) {
  const auto data = generate({IidNormal{}, 8000}, {1, 0});
  const auto layout = make_layout(8000, 2000, 1);
  const auto est = cvar_estimator(0.9);
  for (auto _ : state) benchmark::DoNotOptimize(batch_estimates(data, layout, *est, mode(state)));
  label(state);
}
BENCHMARK(BM_BatchEstimates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_AreaEstimator(benchmark::State& state) {
  const auto data = generate({Ar1Process{0.5}, 20000}, {2, 0});
  const auto layout = make_layout(20000, 2000, 4);
  const auto est = quantile_estimator(0.5);
  const auto w = WeightFunction::constant_sqrt12();
  for (auto _ : state) benchmark::DoNotOptimize(var_ob3(data, layout, *est, w, mode(state)));
  label(state);
}
BENCHMARK(BM_AreaEstimator)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Subsampling(benchmark::State& state) {
  const auto data = generate({IidNormal{}, 100000}, {3, 0});
  const auto est = cvar_estimator(0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(subsample_distribution(data, 316, *est, mode(state)));
  }
  label(state);
}
BENCHMARK(BM_Subsampling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Coverage(benchmark::State& state) {
  auto c = *find_preset("cvar-g0.7-n1000-ob1-b0.25");
  c.replications = 200;
  FixedCriticalValue t(2.43);
  for (auto _ : state) benchmark::DoNotOptimize(coverage_experiment(c, mode(state), &t));
  label(state);
}
BENCHMARK(BM_Coverage)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
