#include <benchmark/benchmark.h>

#include <memory>

#include "slhyper/grid.hpp"
#include "slhyper/hconv.hpp"
#include "slhyper/inteq.hpp"
#include "slhyper/kernel.hpp"
#include "slhyper/spectral.hpp"

using namespace slhyper;

namespace {

std::shared_ptr<Kernel> bessel() { return std::make_shared<Kernel>(builtin_operator("builtin:bessel?alpha=0.5")); }

const SpectralMeasure& cosine_measure() {
  static const SpectralMeasure sm =
      build_spectral_measure(std::make_shared<Kernel>(builtin_operator("builtin:cosine")), 20.0, 512);
  return sm;
}

GridFunction sample_bump(double lo, double hi, int n, double c, double w) {
  return GridFunction::sample(linspace(lo, hi, n), [=](double x) { return bump(x, c, w); });
}

}  // namespace

static void BM_KernelEval(benchmark::State& state) {
  auto k = bessel();
  const double lam = static_cast<double>(state.range(0));
  k->w(lam, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(k->w(lam, 5.0));
}
BENCHMARK(BM_KernelEval)->Arg(1)->Arg(100)->Arg(10000);

static void BM_SpectralMeasure(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto k = bessel();
    benchmark::DoNotOptimize(build_spectral_measure(k, 20.0, n));
  }
}
BENCHMARK(BM_SpectralMeasure)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_ForwardTransform(benchmark::State& state) {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction h = sample_bump(0.0, 10.0, 2001, 4.0, 2.5);
  for (auto _ : state) benchmark::DoNotOptimize(forward_transform(h, sm));
}
BENCHMARK(BM_ForwardTransform)->Unit(benchmark::kMillisecond);

static void BM_Convolve(benchmark::State& state) {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction h = sample_bump(0.0, 6.0, 601, 3.0, 1.5), g = sample_bump(0.0, 4.0, 401, 2.0, 1.0);
  auto out = linspace(0.0, 12.0, 1201);
  for (auto _ : state) benchmark::DoNotOptimize(convolve_functions(h, g, sm, 1e-6, out));
}
BENCHMARK(BM_Convolve)->Unit(benchmark::kMillisecond);

static void BM_WienerLevyCheck(benchmark::State& state) {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction f = heat_kernel_slice(0.25, 1.0, sm, linspace(0.0, sm.L, 2001));
  for (auto _ : state) benchmark::DoNotOptimize(wiener_levy_check(f, SpectralStrip(0.0, 0.0), 1.0, sm, 128));
}
BENCHMARK(BM_WienerLevyCheck)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
