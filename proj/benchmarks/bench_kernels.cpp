#include <benchmark/benchmark.h>

#include "heattrace/kernels.hpp"

namespace {

using heattrace::Domain;
using heattrace::HeatKernel;
using heattrace::Point;
using heattrace::Representation;
using heattrace::Side;

// Lags in units of 1e-4 so the argument list stays integral.
void green_at_lag(benchmark::State& state, Representation representation) {
  const HeatKernel kernel{Domain{}};
  const double lag = static_cast<double>(state.range(0)) * 1e-4;
  const Point x{1.1, 0.0};
  const Point y{1.7, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(kernel.green_lag(x, y, lag, representation));
}

void BM_GreenAuto(benchmark::State& state) { green_at_lag(state, Representation::Auto); }
void BM_GreenSpectral(benchmark::State& state) { green_at_lag(state, Representation::Spectral); }
void BM_GreenImage(benchmark::State& state) { green_at_lag(state, Representation::Image); }

void BM_NormalDerivative(benchmark::State& state) {
  const Domain d;
  const HeatKernel kernel{d};
  const double lag = static_cast<double>(state.range(0)) * 1e-4;
  const auto z = d.boundary_point(Side::Left, 0.0);
  const Point x{0.4, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(kernel.normal_lag(x, z, lag));
}

BENCHMARK(BM_GreenAuto)->Arg(10)->Arg(1000)->Arg(10000);
BENCHMARK(BM_GreenSpectral)->Arg(10)->Arg(1000)->Arg(10000);
BENCHMARK(BM_GreenImage)->Arg(10)->Arg(1000)->Arg(10000);
BENCHMARK(BM_NormalDerivative)->Arg(10)->Arg(1000)->Arg(10000);

}  // namespace
