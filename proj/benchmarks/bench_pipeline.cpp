#include <benchmark/benchmark.h>

#include "stlopt/constraints.hpp"
#include "stlopt/optimizer.hpp"
#include "stlopt/random.hpp"
#include "stlopt/sensitivities.hpp"

using namespace stlopt;

static void BM_BandEvaluation(benchmark::State& state) {
  const GridSpec g = GridSpec::square(static_cast<int>(state.range(0)));
  const bool gradient = state.range(1) != 0;
  const BandAnalysis a(g, MaterialCatalog{}, FrequencyBand{2000, 2500, 5});
  const Field x = random_initial_guess({2, 0, 0}, g).values;
  for (auto _ : state) benchmark::DoNotOptimize(a.evaluate(x, gradient));
}
BENCHMARK(BM_BandEvaluation)->Args({20, 0})->Args({20, 1})->Args({40, 0})->Args({40, 1})->Unit(benchmark::kMillisecond);

static void BM_FilterChain(benchmark::State& state) {
  const GridSpec g = GridSpec::square(static_cast<int>(state.range(0)));
  const FilterSpec spec = FilterSpec::for_grid(g);
  const FilterChain chain(g, spec);
  const Field xi = random_initial_guess({3, 0, 0}, g).values;
  for (auto _ : state) {
    const ChainState s = chain.forward(xi, spec);
    benchmark::DoNotOptimize(chain.backprop(s, {s.fields.b, s.fields.e, s.fields.d, s.fields.e2, s.fields.d2}));
  }
}
BENCHMARK(BM_FilterChain)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_SelfWeight(benchmark::State& state) {
  const GridSpec g = GridSpec::square(static_cast<int>(state.range(0)));
  const SelfWeightAnalysis sw(g, MaterialCatalog{});
  const Field x = random_initial_guess({4, 0, 0}, g).values;
  for (auto _ : state) benchmark::DoNotOptimize(sw.evaluate(x, x));
}
BENCHMARK(BM_SelfWeight)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_ProblemEvaluation(benchmark::State& state) {
  const GridSpec g = GridSpec::square(static_cast<int>(state.range(0)));
  FemDesignProblem p(g, MaterialCatalog{}, FilterSpec::for_grid(g), FrequencyBand{2000, 2500, 5});
  const Field xi = random_initial_guess({5, 0, 0}, g).values;
  const StageState stage;
  for (auto _ : state) benchmark::DoNotOptimize(p.evaluate(xi, stage, true));
}
BENCHMARK(BM_ProblemEvaluation)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
