#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "bosatom/coulomb.hpp"
#include "bosatom/hs1d.hpp"
#include "bosatom/llband.hpp"
#include "bosatom/mh_solver.hpp"

using namespace bosatom;

namespace {

// n_r = n + 1, n_z = 2n + 1 on a 20 x 20 box
GridPtr grid_for(int n) { return build_grid(20.0, 20.0, n + 1, 2 * n + 1); }

void BM_KernelBuild(benchmark::State& state) {
  const auto g = grid_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel(g));
}
BENCHMARK(BM_KernelBuild)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Convolve(benchmark::State& state) {
  const auto g = grid_for(static_cast<int>(state.range(0)));
  const auto k = load_or_build_kernel(g);
  std::vector<double> q(g->size()), phi(g->size());
  for (int i = 0; i < g->n_r(); ++i)
    for (int j = 0; j < g->n_z(); ++j) q[g->index(i, j)] = g->weight(i, j) * std::exp(-std::hypot(g->r(i), g->z(j)));
  for (auto _ : state) {
    k->convolve(q, phi);
    benchmark::DoNotOptimize(phi.data());
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(g->size()));
}
BENCHMARK(BM_Convolve)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond)->Complexity();

void BM_ConvolveDirect(benchmark::State& state) {
  const auto g = grid_for(static_cast<int>(state.range(0)));
  const auto k = load_or_build_kernel(g);
  std::vector<double> q(g->size(), 0.0), phi(g->size());
  for (int i = 0; i < g->n_r(); ++i)
    for (int j = 0; j < g->n_z(); ++j) q[g->index(i, j)] = g->weight(i, j) * std::exp(-std::hypot(g->r(i), g->z(j)));
  for (auto _ : state) {
    k->convolve_direct(q, phi);
    benchmark::DoNotOptimize(phi.data());
  }
}
BENCHMARK(BM_ConvolveDirect)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  const MHContext ctx(grid_for(static_cast<int>(state.range(0))));
  MHParams p;
  p.lambda = 1.0;
  p.beta = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(minimize(p, ctx).breakdown.E);
}
BENCHMARK(BM_Solve)->Args({64, 0})->Args({64, 1})->Args({128, 0})->Unit(benchmark::kMillisecond);

void BM_HSSolve(benchmark::State& state) {
  HSParams p;
  p.lambda = static_cast<double>(state.range(0)) / 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(hs_minimize(p).energy.E);
}
BENCHMARK(BM_HSSolve)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Confined(benchmark::State& state) {
  ConfinedParams p;
  p.lambda = 1.0;
  p.beta = static_cast<double>(state.range(0));
  const EffectiveKernels k(p.beta, 2.0 * ConfinedGridOptions{}.z_max);
  for (auto _ : state) benchmark::DoNotOptimize(confined_minimize(p, k).energy.E);
}
BENCHMARK(BM_Confined)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
