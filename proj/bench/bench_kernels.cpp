#include <random>

#include <benchmark/benchmark.h>

#include "whitemetric/kernels.hpp"

namespace {

using whitemetric::GroundCost;
using whitemetric::kernels::Index;
using whitemetric::kernels::Matrix;
using whitemetric::kernels::Vector;

Matrix points(Index n, Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) m(i, k) = z(rng);
  }
  return m;
}

Vector uniform(Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

template <Matrix (*Kernel)(const Matrix&, const Matrix&, GroundCost)>
void cost_matrix(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix x = points(n, 3, 1);
  const Matrix y = points(n, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, y, GroundCost::euclidean));
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <double (*Kernel)(const Matrix&, const Vector&, const Matrix&, const Vector&)>
void mean_pair_distance(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix x = points(n, 3, 1);
  const Matrix y = points(n, 3, 2);
  const Vector w = uniform(n);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, w, y, w));
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <whitemetric::kernels::EcfSum (*Kernel)(const Matrix&, const Vector&, const Vector&)>
void ecf(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix x = points(n, 3, 1);
  const Vector w = uniform(n);
  const Vector xi = Vector::Constant(3, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, w, xi));
  state.SetItemsProcessed(state.iterations() * n);
}

namespace serial = whitemetric::kernels::serial;
namespace parallel = whitemetric::kernels::parallel;

BENCHMARK(cost_matrix<serial::cost_matrix>)->Name("cost_matrix/serial")->Arg(500)->Arg(2000);
BENCHMARK(cost_matrix<parallel::cost_matrix>)->Name("cost_matrix/parallel")->Arg(500)->Arg(2000);
BENCHMARK(mean_pair_distance<serial::mean_pair_distance>)
    ->Name("mean_pair_distance/serial")->Arg(500)->Arg(2000);
BENCHMARK(mean_pair_distance<parallel::mean_pair_distance>)
    ->Name("mean_pair_distance/parallel")->Arg(500)->Arg(2000);
BENCHMARK(ecf<serial::ecf>)->Name("ecf/serial")->Arg(10000)->Arg(100000);
BENCHMARK(ecf<parallel::ecf>)->Name("ecf/parallel")->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
