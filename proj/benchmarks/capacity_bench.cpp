#include <benchmark/benchmark.h>

#include <random>

#include "potlab/capacity.hpp"
#include "potlab/simplex.hpp"

using namespace potlab;

namespace {

void BM_Simplex(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  DenseMatrix A(2 * n, n);
  for (double& a : A.data) a = u(rng);
  const std::vector<double> c(n, 1.0), b(2 * n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(maximize(c, A, b));
}
BENCHMARK(BM_Simplex)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_CapacityOfBall(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(capacity_of_ball(dim, 1.0, 1.0 / 16));
}
BENCHMARK(BM_CapacityOfBall)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
