#include "clustreg/em.hpp"
#include "clustreg/metrics.hpp"
#include "clustreg/simulation.hpp"
#include "clustreg/tuning.hpp"

#include <benchmark/benchmark.h>

using namespace clustreg;

namespace {

Dataset scenario_data(Index n, int groups) {
  ScenarioSpec s;
  s.n = n;
  if (groups == 3) {
    s.mixing = {0.2, 0.3, 0.5};
    s.intercepts = {4, 9, 16};
  }
  Rng rng(42);
  return draw_scenario(s, rng).data;
}

ConstraintSpec spec_for(int which) {
  switch (which) {
    case 0: return ConstraintSpec::homoscedastic();
    case 1: return ConstraintSpec::heteroscedastic();
    default: return ConstraintSpec::constrained(0.3, 0.5);
  }
}

void BM_EmSingleRun(benchmark::State& state) {
  const Dataset d = scenario_data(state.range(0), 2);
  const ConstraintSpec spec = spec_for(static_cast<int>(state.range(1)));
  const ModelParams init = initialize(d, 2, spec, 7);
  EmConfig em;
  for (auto _ : state) benchmark::DoNotOptimize(run_em(d, 2, spec, em, init));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EmSingleRun)->ArgsProduct({{100, 1000, 10000}, {0, 1, 2}});

void BM_MultiStart(benchmark::State& state) {
  const Dataset d = scenario_data(200, 3);
  EmConfig em;
  for (auto _ : state) {
    benchmark::DoNotOptimize(multi_start_fit(d, 3, ConstraintSpec::heteroscedastic(), em,
                                             static_cast<int>(state.range(0)), 1));
  }
}
BENCHMARK(BM_MultiStart)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SelectC(benchmark::State& state) {
  const Dataset d = scenario_data(100, 2);
  CvConfig cv;
  cv.seed = 3;
  EmConfig em;
  for (auto _ : state) benchmark::DoNotOptimize(select_c(d, 2, cv, em, 10));
}
BENCHMARK(BM_SelectC)->Unit(benchmark::kMillisecond);

void BM_AdjustedRand(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<int> a(n), b(n);
  Rng rng(5);
  std::uniform_int_distribution<int> k(0, 4);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = k(rng);
    b[i] = k(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(adjusted_rand(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AdjustedRand)->Range(1 << 8, 1 << 20);

}  // namespace

BENCHMARK_MAIN();
