#include <benchmark/benchmark.h>

#include <cmath>

#include "wkg/evolver.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/slice_diag.hpp"
#include "wkg/wave_decomp.hpp"
#include "wkg/z_operators.hpp"

using namespace wkg;

namespace {

RadialGrid grid_for(double t_final, double dr) {
  return RadialGrid(t_final + 3.0, static_cast<int>(std::lround((t_final + 3.0) / dr)) + 1);
}

}  // namespace

// One RK4 step with every node active; range(0) is the node count.
static void BM_Rk4Step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RadialGrid g(0.005 * (n - 1), n);
  CoefficientSet k;
  k.B = -1.0;
  EvolverOptions opt;
  opt.active_region = false;
  Evolver e(g, k, Mode::coupled, opt);
  FieldState s = make_initial_data(g, 0.01);
  const double dt = 0.4 * g.dr();
  for (auto _ : state) {
    e.step(s, dt);
    benchmark::DoNotOptimize(s.u().data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Rk4Step)->Arg(4001)->Arg(40001);

// Same with the three decomposition waves co-evolved.
static void BM_Rk4StepSplit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RadialGrid g(0.005 * (n - 1), n);
  CoefficientSet k;
  k.B = -1.0;
  EvolverOptions opt;
  opt.active_region = false;
  Evolver e(g, k, Mode::coupled, opt);
  FieldState s = make_initial_data(g, 0.01);
  enable_decomposition(e, s);
  const double dt = 0.4 * g.dr();
  for (auto _ : state) {
    e.step(s, dt);
    benchmark::DoNotOptimize(s.u().data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Rk4StepSplit)->Arg(4001);

// Jets and boosted words at one node; range(0) is the derivative order.
static void BM_JetWords(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const RadialGrid g = grid_for(12.0, 0.01);
  Evolver e(g, CoefficientSet{}, Mode::coupled);
  FieldState s = make_initial_data(g, 0.01);
  const History h = e.run(s, RunPlan{12.0, 5});
  const double t = 8.0, r = 4.0;
  for (auto _ : state) {
    Jet j = h.jet(kV, t, r, order, 6);
    for (int m = 1; m < order; ++m) j = boost_jet(j, t, r);
    benchmark::DoNotOptimize(j.d.data());
  }
}
BENCHMARK(BM_JetWords)->Arg(2)->Arg(4);

// Slice extraction and energies on one hyperboloid of a stored run.
static void BM_SliceEnergy(benchmark::State& state) {
  const RadialGrid g = grid_for(13.0, 0.01);
  Evolver e(g, CoefficientSet{}, Mode::coupled);
  FieldState s = make_initial_data(g, 0.01);
  const History h = e.run(s, RunPlan{13.0, 5});
  for (auto _ : state) {
    const SliceData sl = extract_slice(h, 5.0);
    benchmark::DoNotOptimize(energy_standard(sl, kV, 1.0) + energy_conformal(sl, kU));
  }
}
BENCHMARK(BM_SliceEnergy);

BENCHMARK_MAIN();
