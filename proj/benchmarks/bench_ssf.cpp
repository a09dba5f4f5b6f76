#include <benchmark/benchmark.h>

#include <cmath>

#include "ssflab/rng.hpp"
#include "ssflab/ssf.hpp"

using namespace ssflab;

namespace {

SpectralData random_spectrum(std::size_t n, std::uint64_t stream) {
  StreamRng rng({1, stream, 0});
  std::vector<double> v(n);
  for (auto& x : v) x = 8.0 * rng.uniform01();
  return SpectralData::from_eigenvalues(std::move(v));
}

}  // namespace

static void BM_SSFCounting(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_spectrum(n, 1);
  const auto b = random_spectrum(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ssf_counting(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SSFCounting)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

static void BM_KreinCheck(benchmark::State& state) {
  const auto a = random_spectrum(1024, 1);
  const auto b = random_spectrum(1024, 2);
  const SwitchFunction rho = make_switch(4.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(krein_check(a, b, [&](double x) { return rho(x); }));
}
BENCHMARK(BM_KreinCheck);

static void BM_FtEval(benchmark::State& state) {
  const FtFunctional fn{1.0, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(ft_eval_scaled(fn, 500.0));
}
BENCHMARK(BM_FtEval)->DenseRange(1, 3);
