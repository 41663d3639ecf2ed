#include <benchmark/benchmark.h>

#include "heattrace/verify.hpp"

namespace {

using namespace heattrace;

// Crank-Nicolson solve of the boundary-one problem with h = k = 1 / range.
void BM_FdSolve(benchmark::State& state) {
  const Domain d;
  const FDData data = fd_data(fixture("boundary-one"), d);
  FDOptions options;
  options.h = options.k = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fd_solve(d, data, 1.0, options));
}

BENCHMARK(BM_FdSolve)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
