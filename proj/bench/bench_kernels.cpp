// Parallel kernels against their serial references. Arg = thread count for
// the parallel variants. Rates use wall time so thread counts compare fairly.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "twinhet/spectral.hpp"
#include "twinhet/synth.hpp"

using namespace twinhet;

namespace {

SimConfig bench_config() {
  SimConfig c;
  c.duration = 1.0;
  c.seed = 7;
  return c;
}

const TimeSeriesPair& bench_series() {
  static const TimeSeriesPair ts = reference::synthesize(bench_config());
  return ts;
}

void BM_SynthesizeParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const SimConfig c = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(c));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(c.sample_rate * c.duration));
}

void BM_SynthesizeReference(benchmark::State& state) {
  const SimConfig c = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(reference::synthesize(c));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(c.sample_rate * c.duration));
}

void BM_WelchParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const auto& ts = bench_series();
  for (auto _ : state) benchmark::DoNotOptimize(welch_psd(ts.i_inphase, bench_config().sample_rate));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(ts.size()));
}

void BM_WelchReference(benchmark::State& state) {
  const auto& ts = bench_series();
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::welch_psd(ts.i_inphase, bench_config().sample_rate));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(ts.size()));
}

}  // namespace

BENCHMARK(BM_SynthesizeReference)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthesizeParallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WelchReference)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WelchParallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
