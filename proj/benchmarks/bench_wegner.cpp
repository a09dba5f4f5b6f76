#include <benchmark/benchmark.h>

#include "ssflab/wegner.hpp"

using namespace ssflab;

static void BM_WegnerRealization(benchmark::State& state) {
  WegnerConfig cfg;
  cfg.model = ModelSpec{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1.0,
                        {}, 1.0, {}};
  cfg.eps_grid = {0.25, 0.125, 0.0625};
  cfg.realizations = 1;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(wegner_experiment(cfg));
  }
}
BENCHMARK(BM_WegnerRealization)->Args({1, 64})->Args({1, 256})->Args({2, 16})->Args({2, 24})
    ->Unit(benchmark::kMillisecond);
