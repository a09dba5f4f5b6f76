#include <benchmark/benchmark.h>

#include "ssflab/lattice.hpp"
#include "ssflab/spectral.hpp"

using namespace ssflab;

static void BM_EigenDecompose(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Domain d = build_box_domain(2, side, 1.0);
  const auto op = assemble_operator(d, std::vector<double>(d.size(), 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(eigen_decompose(op));
  state.SetLabel(std::to_string(d.size()) + " sites");
}
BENCHMARK(BM_EigenDecompose)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

static void BM_SpectrumOnly(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Domain d = build_box_domain(2, side, 1.0);
  const auto op = assemble_operator(d, std::vector<double>(d.size(), 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(spectrum(op));
  state.SetLabel(std::to_string(d.size()) + " sites");
}
BENCHMARK(BM_SpectrumOnly)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

static void BM_MagneticDecompose(benchmark::State& state) {
  const Domain d = build_box_domain(2, static_cast<int>(state.range(0)), 1.0);
  const auto op = assemble_operator(d, std::vector<double>(d.size(), 0.0),
                                    constant_field_phases(d, 0.3, Gauge::symmetric));
  for (auto _ : state) benchmark::DoNotOptimize(eigen_decompose(op));
}
BENCHMARK(BM_MagneticDecompose)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
