#include <benchmark/benchmark.h>

#include "stlopt/fem.hpp"
#include "stlopt/random.hpp"
#include "stlopt/sparse_lu.hpp"

using namespace stlopt;

namespace {

Field design(const GridSpec& g) { return random_initial_guess({1, 0, 0}, g).values; }

}  // namespace

static void BM_ReducedAssembly(benchmark::State& state) {
  const GridSpec g = GridSpec::square(static_cast<int>(state.range(0)));
  const MaterialCatalog cat;
  const ReducedAssembler a(g, cat.nu);
  const Field x = design(g);
  for (auto _ : state) benchmark::DoNotOptimize(a.assemble(x, cat));
  state.SetLabel(std::to_string(g.num_elements()) + " elements");
}
BENCHMARK(BM_ReducedAssembly)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_ReferenceAssemblyAndReduction(benchmark::State& state) {
  const GridSpec g = GridSpec::square(static_cast<int>(state.range(0)));
  const MaterialCatalog cat;
  const Field x = design(g);
  for (auto _ : state) benchmark::DoNotOptimize(bloch_reduce(assemble(x, cat, g), 0.0, g));
}
BENCHMARK(BM_ReferenceAssemblyAndReduction)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_Factorization(benchmark::State& state) {
  const GridSpec g = GridSpec::square(static_cast<int>(state.range(0)));
  const MaterialCatalog cat;
  const ReducedSystem sys = ReducedAssembler(g, cat.nu).assemble(design(g), cat);
  const SparseMatrixC A = dynamic_matrix(sys, IncidentWave{2250.0}, cat);
  for (auto _ : state) {
    SparseLU lu(A);
    benchmark::DoNotOptimize(lu.rcond());
  }
  state.SetLabel(std::to_string(A.rows()) + " unknowns");
}
BENCHMARK(BM_Factorization)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_Solve(benchmark::State& state) {
  const GridSpec g = GridSpec::square(static_cast<int>(state.range(0)));
  const MaterialCatalog cat;
  const ReducedSystem sys = ReducedAssembler(g, cat.nu).assemble(design(g), cat);
  const IncidentWave w{2250.0};
  const SparseLU lu(dynamic_matrix(sys, w, cat));
  const VectorC b = excitation(sys, w, cat);
  for (auto _ : state) benchmark::DoNotOptimize(lu.solve(b));
}
BENCHMARK(BM_Solve)->Arg(40)->Arg(100)->Unit(benchmark::kMicrosecond);
