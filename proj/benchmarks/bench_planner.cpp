#include <benchmark/benchmark.h>

#include "urbanot/oracle.hpp"
#include "urbanot/planner.hpp"

namespace {

using namespace urbanot;

void BM_OptimizeMasses(benchmark::State& state) {
  const EnergyCurve curve(FunctionFamily::quadratic(), ConcentrationFamily::power(0.05, 0.5), 2.0, 2);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(optimize_masses(curve, k).value);
}
BENCHMARK(BM_OptimizeMasses)->DenseRange(2, 6, 2);

void BM_EnergyCurve(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(
        EnergyCurve(FunctionFamily::power(1.0, 3.0), ConcentrationFamily::power(0.2, 0.5), 1.5, 2).samples());
}
BENCHMARK(BM_EnergyCurve);

void BM_BruteForce(benchmark::State& state) {
  BruteForceInstance inst{Grid(Domain::interval(0.0, 1.0), 32), {{0.25}, {0.5}, {0.75}}};
  inst.mass_denominator = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_full(inst).solution.objective.total);
}
BENCHMARK(BM_BruteForce)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
