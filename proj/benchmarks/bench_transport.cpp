#include <benchmark/benchmark.h>

#include <random>

#include "urbanot/transport.hpp"

namespace {

urbanot::WeightedPointCloud cloud(std::mt19937_64& rng, int dim, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> coords(n * static_cast<std::size_t>(dim));
  for (double& c : coords) c = u(rng);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& v : w) total += (v = 0.1 + u(rng));
  for (double& v : w) v /= total;
  return {dim, std::move(coords), std::move(w)};
}

void BM_DiscreteTransport(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(rng, 2, n);
  const auto b = cloud(rng, 2, n);
  for (auto _ : state) benchmark::DoNotOptimize(urbanot::solve_discrete_transport(a, b, 2.0).total_cost);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DiscreteTransport)->RangeMultiplier(2)->Range(16, 512)->Complexity();

void BM_ManyToFew(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto a = cloud(rng, 2, static_cast<std::size_t>(state.range(0)));
  const auto b = cloud(rng, 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(urbanot::solve_discrete_transport(a, b, 1.5).total_cost);
}
BENCHMARK(BM_ManyToFew)->Arg(1000)->Arg(10000)->Arg(40000);

void BM_Potentials(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto plan = urbanot::solve_discrete_transport(cloud(rng, 2, 256), cloud(rng, 2, 256), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(urbanot::recover_potentials(plan));
}
BENCHMARK(BM_Potentials);

}  // namespace

BENCHMARK_MAIN();
