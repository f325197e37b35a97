// Serial reference against the OpenMP sweep kernel on generated metrics.
//
//   bench_sweep --benchmark_counters_tabular=true
//
// The Arg is the number of metrics per dimension; each metric carries
// seven boundary values.

#include <benchmark/benchmark.h>
#include <fmt/format.h>

#include "massbound/experiment.hpp"

namespace {

massbound::ExperimentConfig sweep_config(int count) {
  return massbound::parse_config(fmt::format(R"(
[experiment]
seed = 7
[metric]
family = generated
n = 3, 4, 5
count = {}
[theorem]
name = boundary-level
c = -0.9, -0.5, 0, 0.5, 0.9, 1.5, 3
)",
                                             count));
}

void BM_SweepSerial(benchmark::State& state) {
  const auto config = sweep_config(static_cast<int>(state.range(0)));
  std::size_t rows = 0;
  for (auto _ : state) {
    auto out = massbound::run_rows_serial(config);
    rows += out.size();
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["rows/s"] = benchmark::Counter(static_cast<double>(rows), benchmark::Counter::kIsRate);
}

void BM_SweepOpenMP(benchmark::State& state) {
  const auto config = sweep_config(static_cast<int>(state.range(0)));
  std::size_t rows = 0;
  for (auto _ : state) {
    auto out = massbound::run_rows(config, 0);
    rows += out.size();
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["rows/s"] = benchmark::Counter(static_cast<double>(rows), benchmark::Counter::kIsRate);
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepOpenMP)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
