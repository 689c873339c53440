#include <benchmark/benchmark.h>

#include "urbanot/semidiscrete.hpp"

namespace {

using namespace urbanot;

void BM_SolveWeights1d(benchmark::State& state) {
  const Grid grid(Domain::interval(0.0, 1.0), static_cast<int>(state.range(0)));
  const AtomicMeasure nu({{{0.2}, 0.3}, {{0.5}, 0.3}, {{0.85}, 0.4}});
  for (auto _ : state) benchmark::DoNotOptimize(solve_weights(nu, FunctionFamily::quadratic(), 2.0, grid).c);
}
BENCHMARK(BM_SolveWeights1d)->Arg(100)->Arg(400)->Arg(1600);

void BM_SolveWeights2d(benchmark::State& state) {
  const Grid grid(Domain::box({0.0, 0.0}, {1.0, 1.0}), static_cast<int>(state.range(0)));
  const AtomicMeasure nu({{{0.3, 0.3}, 0.25}, {{0.7, 0.35}, 0.25}, {{0.4, 0.75}, 0.3}, {{0.8, 0.8}, 0.2}});
  for (auto _ : state) benchmark::DoNotOptimize(solve_weights(nu, FunctionFamily::power(1.0, 3.0), 1.5, grid).c);
}
BENCHMARK(BM_SolveWeights2d)->Arg(32)->Arg(64)->Arg(128);

void BM_MuSubproblem(benchmark::State& state) {
  const Grid grid(Domain::interval(0.0, 1.0), static_cast<int>(state.range(0)));
  const AtomicMeasure nu({{{0.3}, 0.45}, {{0.75}, 0.55}});
  for (auto _ : state) benchmark::DoNotOptimize(min_Fp_nu(nu, FunctionFamily::quadratic(), 2.0, grid).total());
}
BENCHMARK(BM_MuSubproblem)->Arg(100)->Arg(400);

void BM_RadiusOfMass(benchmark::State& state) {
  const auto f = FunctionFamily::power(1.0, 1.5);
  double m = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(radius_of_mass(f, 1.5, 2, m));
    m = m < 0.9 ? m * 1.01 : 1e-3;
  }
}
BENCHMARK(BM_RadiusOfMass);

}  // namespace

BENCHMARK_MAIN();
