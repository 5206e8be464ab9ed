#include <random>

#include <benchmark/benchmark.h>

#include "railguard/maxsum.hpp"

namespace {

using namespace railguard;

FactorGraph random_tree(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  FactorGraph g;
  for (std::size_t v = 0; v < n; ++v) g.add_variable();
  std::vector<std::vector<std::size_t>> scopes(n);
  for (std::size_t v = 0; v < n; ++v) scopes[v].push_back(v);
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    scopes[parent].push_back(v);
  }
  std::bernoulli_distribution coin(0.5);
  for (std::size_t v = 0; v < n; ++v) {
    g.add_factor(v, scopes[v], coin(rng) ? ActionValues{-1.0, 1.0} : ActionValues{1.0, -1.0});
  }
  return g;
}

void BM_MaxSumTree(benchmark::State& state) {
  const auto g = random_tree(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_maxsum(g, 100, 0.0));
  }
}
BENCHMARK(BM_MaxSumTree)->Arg(3)->Arg(8)->Arg(16);

void BM_BruteForce(benchmark::State& state) {
  const auto g = random_tree(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(brute_force_optimum(g));
  }
}
BENCHMARK(BM_BruteForce)->Arg(3)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
