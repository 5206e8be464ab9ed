#include <benchmark/benchmark.h>

#include "railguard/detection.hpp"
#include "railguard/scenario.hpp"
#include "railguard/simulation.hpp"
#include "railguard/sweep.hpp"

namespace {

using namespace railguard;

const Scenario& base() {
  static const Scenario sc = load_scenario(RAILGUARD_SCENARIO_DIR "/sample.scn");
  return sc;
}

void BM_ScanAll(benchmark::State& state) {
  const auto sc = generate_scenario(base(), static_cast<std::size_t>(state.range(0)), 1);
  const World world = sc.initial_world();
  for (auto _ : state) {
    benchmark::DoNotOptimize(scan_all(world, ScanOptions{}));
  }
}
BENCHMARK(BM_ScanAll)->Arg(4)->Arg(16)->Arg(30);

void BM_RunScenario(benchmark::State& state) {
  const auto sc = generate_scenario(base(), static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(sc));
  }
}
BENCHMARK(BM_RunScenario)->Arg(4)->Arg(16)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace
