#include "rkhs/clustering.hpp"
#include "rkhs/data.hpp"
#include "rkhs/kernel_ops.hpp"
#include "rkhs/solvers.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

rkhs::Matrix random_costs(rkhs::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rkhs::Matrix c(n, n);
  for (rkhs::Index i = 0; i < n; ++i)
    for (rkhs::Index j = 0; j < n; ++j) c(i, j) = u(rng);
  return c;
}

void BM_Gram(benchmark::State& state) {
  const auto n = state.range(0);
  const rkhs::PointSet x = rkhs::gen_blobs(5, n, 8, 1);
  const rkhs::ScaledKernel k = rkhs::fit_scaling(x, x, "gaussian");
  for (auto _ : state) benchmark::DoNotOptimize(rkhs::gram(k, x, x));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_ExtrapolationFit(benchmark::State& state) {
  const auto n = state.range(0);
  const rkhs::PointSet x = rkhs::gen_blobs(5, n, 4, 2);
  const rkhs::ScaledKernel k = rkhs::fit_scaling(x, x, "matern-l1");
  const rkhs::Matrix fx = x.matrix().rowwise().squaredNorm();
  for (auto _ : state) benchmark::DoNotOptimize(rkhs::fit(k, x, fx).theta());
}
BENCHMARK(BM_ExtrapolationFit)->RangeMultiplier(2)->Range(128, 1024);

void BM_Lsap(benchmark::State& state) {
  const rkhs::Matrix c = random_costs(state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(rkhs::lsap_exact(c));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Lsap)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_GreedyDiscrepancy(benchmark::State& state) {
  const rkhs::PointSet x = rkhs::gen_blobs(5, state.range(0), 2, 4);
  const rkhs::ScaledKernel k = rkhs::fit_scaling(x, x, "gaussian");
  for (auto _ : state) benchmark::DoNotOptimize(rkhs::greedy_discrepancy_clusters(k, x, state.range(0) / 8));
}
BENCHMARK(BM_GreedyDiscrepancy)->RangeMultiplier(2)->Range(256, 2048);

}  // namespace
BENCHMARK_MAIN();
