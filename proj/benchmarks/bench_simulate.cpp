#include <benchmark/benchmark.h>

#include "rspread/rng.hpp"
#include "rspread/simulate.hpp"

using namespace rspread;

namespace {

SpreadingProfile gamma_profile(double k, count_t n0) {
  ProfileSpec spec;
  GammaSpec gamma;
  gamma.shape = k;
  spec.family = gamma;
  spec.n0 = n0;
  spec.target_r0 = 3.0;
  spec.atom_count = 1000;
  return build_profile(spec);
}

}  // namespace

static void BM_PhiloxUnit(benchmark::State& state) {
  PhiloxStream rng(1);
  double sink = 0.0;
  for (auto _ : state) sink += rng.next_unit();
  benchmark::DoNotOptimize(sink);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxUnit);

static void BM_PopulationDraw(benchmark::State& state) {
  const count_t n0 = static_cast<count_t>(state.range(0));
  const SpreadingProfile profile = gamma_profile(0.1, n0);
  count_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(draw_population(profile, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * n0);
}
BENCHMARK(BM_PopulationDraw)->Arg(10000)->Arg(100000);

static void BM_SimulateFullCourse(benchmark::State& state) {
  const count_t n0 = static_cast<count_t>(state.range(0));
  const SpreadingProfile profile = gamma_profile(0.1, n0);
  const Population population = draw_population(profile, 42);
  count_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(population, n0, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * n0);
}
BENCHMARK(BM_SimulateFullCourse)->Arg(10000)->Arg(100000);
