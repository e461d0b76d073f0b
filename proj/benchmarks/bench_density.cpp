#include <benchmark/benchmark.h>

#include "rspread/density.hpp"
#include "rspread/interventions.hpp"

using namespace rspread;

namespace {

SpreadingProfile gamma_profile(double k, count_t n0, count_t atoms) {
  ProfileSpec spec;
  GammaSpec gamma;
  gamma.shape = k;
  spec.family = gamma;
  spec.n0 = n0;
  spec.target_r0 = 3.0;
  spec.atom_count = atoms;
  return build_profile(spec);
}

}  // namespace

static void BM_DensityStep(benchmark::State& state) {
  const count_t atoms = static_cast<count_t>(state.range(0));
  const SpreadingProfile profile = gamma_profile(0.5, 1000000, atoms);
  for (auto _ : state) {
    state.PauseTiming();
    DensityEvolver evolver(profile);
    state.ResumeTiming();
    for (int i = 0; i < 1000; ++i) evolver.advance();
    benchmark::DoNotOptimize(evolver.reproduction());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_DensityStep)->Arg(10)->Arg(100)->Arg(1000);

static void BM_TrajectoryToThreshold(benchmark::State& state) {
  const double k = static_cast<double>(state.range(0)) / 100.0;
  const SpreadingProfile profile = gamma_profile(k, 100000, 1000);
  for (auto _ : state) {
    const RTrajectory trajectory = r_trajectory(profile);
    benchmark::DoNotOptimize(trajectory.values.back());
  }
}
BENCHMARK(BM_TrajectoryToThreshold)->Arg(10)->Arg(100)->Arg(1000);

static void BM_RegionCost(benchmark::State& state) {
  const Region region("bench", gamma_profile(0.1, 100000, 1000));
  const count_t vaccines = static_cast<count_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cost_of_region(region, vaccines));
  }
}
BENCHMARK(BM_RegionCost)->Arg(0)->Arg(50000);
