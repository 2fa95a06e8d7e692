// Serial vs OpenMP kernels. Run with --benchmark_counters_tabular=true.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <vector>

#include "oraclesim/experiment.hpp"
#include "oraclesim/kernels.hpp"

namespace {

using namespace oraclesim;

void BM_CoverageHitsSerial(benchmark::State& state) {
  const auto trials = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::coverage_hits_serial(500, 50, 29, trials, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trials));
}

void BM_CoverageHitsParallel(benchmark::State& state) {
  const auto trials = static_cast<std::uint64_t>(state.range(0));
  state.counters["threads"] = omp_get_max_threads();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::coverage_hits_parallel(500, 50, 29, trials, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trials));
}

struct Reports {
  std::vector<double> values, truths;
  explicit Reports(std::size_t n) : values(n), truths(n) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> noise(0.0, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      truths[i] = 100.0;
      values[i] = 100.0 + noise(gen);
    }
  }
};

void BM_HistogramSerial(benchmark::State& state) {
  const Reports r(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::deviation_histogram_serial(r.values, r.truths, 20, 10.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HistogramParallel(benchmark::State& state) {
  const Reports r(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::deviation_histogram_parallel(r.values, r.truths, 20, 10.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<experiment::Cell> sweep_cells() {
  experiment::GridSpec g;
  g.base.rounds = 20;
  g.base.output.trace = false;
  g.feeders = {30, 50};
  g.malicious_fractions = {0.1, 0.3};
  g.alpha_bands = {g.base.alpha_band};
  g.strategies = {Strategy::DecTest};
  g.seeds = {1};
  return experiment::expand(g);
}

void BM_SweepSerial(benchmark::State& state) {
  const auto cells = sweep_cells();
  for (auto _ : state) benchmark::DoNotOptimize(experiment::run_cells_serial(cells));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto cells = sweep_cells();
  for (auto _ : state) benchmark::DoNotOptimize(experiment::run_cells_parallel(cells));
}

BENCHMARK(BM_CoverageHitsSerial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoverageHitsParallel)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramSerial)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_HistogramParallel)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
