// Micro benchmarks for the dense kernels and the two QLP variants on square
// Gaussian matrices. The flops counter reports the achieved rate from the
// nominal operation counts.
#include <benchmark/benchmark.h>

#include "rqlp/decompositions.hpp"
#include "rqlp/kernels.hpp"

namespace {

using namespace rqlp;

DenseMatrix input(Index n) {
  GaussianStream stream(42);
  return gaussian_matrix(stream, n, n);
}

void set_rate(benchmark::State& state, double flops) {
  state.counters["flops"] = benchmark::Counter(flops, benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::OneK::kIs1000);
}

void BM_Matmul(benchmark::State& state) {
  const Index n = state.range(0);
  const DenseMatrix a = input(n);
  const DenseMatrix b = input(n);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  set_rate(state, 2.0 * static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(n));
}

void BM_Qr(benchmark::State& state) {
  const Index n = state.range(0);
  const DenseMatrix a = input(n);
  for (auto _ : state) benchmark::DoNotOptimize(qr(a));
  // Factorization plus explicit Q.
  set_rate(state, 8.0 / 3.0 * static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(n));
}

void BM_Cpqr(benchmark::State& state) {
  const Index n = state.range(0);
  const DenseMatrix a = input(n);
  for (auto _ : state) benchmark::DoNotOptimize(cpqr(a));
  set_rate(state, static_cast<double>(flops_cpqr(n, n)));
}

void BM_RandQlp(benchmark::State& state) {
  const Index n = state.range(0);
  const DenseMatrix a = input(n);
  for (auto _ : state) {
    GaussianStream stream(1);
    benchmark::DoNotOptimize(rand_qlp(a, stream));
  }
  set_rate(state, static_cast<double>(flops_rand_qlp(n, n)));
}

void BM_PivotedQlp(benchmark::State& state) {
  const Index n = state.range(0);
  const DenseMatrix a = input(n);
  for (auto _ : state) benchmark::DoNotOptimize(pivoted_qlp(a));
}

void BM_JacobiSvd(benchmark::State& state) {
  const Index n = state.range(0);
  const DenseMatrix a = input(n);
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_svd(a));
}

}  // namespace

BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Qr)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Cpqr)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RandQlp)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PivotedQlp)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobiSvd)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
