#include <benchmark/benchmark.h>

#include <string>

#include "heattrace/representation.hpp"
#include "heattrace/verify.hpp"

namespace {

using namespace heattrace;

void point_evaluation(benchmark::State& state, const std::string& name) {
  const SolutionField u = make_solution_field(fixture(name), HeatKernel{Domain{}});
  const Point x{1.3, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(u(x, 0.25));
}

void BM_EvalEigenfunction(benchmark::State& state) { point_evaluation(state, "eigenfunction"); }
void BM_EvalBoundaryOne(benchmark::State& state) { point_evaluation(state, "boundary-one"); }
void BM_EvalLateralRamp(benchmark::State& state) { point_evaluation(state, "lateral-ramp"); }
void BM_EvalCornerAtom(benchmark::State& state) { point_evaluation(state, "corner-atom"); }

void BM_GridBoundaryOne(benchmark::State& state) {
  const Domain d;
  const SolutionField u = make_solution_field(fixture("boundary-one"), HeatKernel{d});
  GridSpec g;
  g.nx = static_cast<int>(state.range(0));
  g.nt = static_cast<int>(state.range(0));
  g.x_lo = 0.05;
  g.x_hi = d.b() - 0.05;
  g.t_lo = 0.01;
  g.t_hi = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_on_grid(u, g));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

BENCHMARK(BM_EvalEigenfunction);
BENCHMARK(BM_EvalBoundaryOne);
BENCHMARK(BM_EvalLateralRamp);
BENCHMARK(BM_EvalCornerAtom);
BENCHMARK(BM_GridBoundaryOne)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
