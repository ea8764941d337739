#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "mongeampere/aleksandrov.hpp"
#include "mongeampere/asymptotics.hpp"
#include "mongeampere/radial.hpp"
#include "mongeampere/solver.hpp"

using namespace mongeampere;

static void BM_RadialExcess(benchmark::State& state) {
  const SourceMeasure m = measures::radial_tail(1.0, 4.0, 1.0);
  const RadialPotential w = w_c_potential(radialize(m, RadializeMode::Lower, 256), 0.25);
  double r = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(w.excess(r));
    r = r > 1e6 ? 1.0 : r * 1.37;
  }
}
BENCHMARK(BM_RadialExcess);

static void BM_LowerHull(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  std::vector<Vec2> nodes;
  std::vector<double> values;
  const int m = static_cast<int>(state.range(0));
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j) {
      const Vec2 x{i * h, j * h};
      if (norm(x) > 1.0) continue;
      nodes.push_back(x);
      values.push_back(0.5 * norm2(x) + norm(x));
    }
  for (auto _ : state) benchmark::DoNotOptimize(lower_hull(nodes, values));
  state.SetComplexityN(static_cast<long>(nodes.size()));
}
BENCHMARK(BM_LowerHull)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_SolveOneAtom(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  auto grid = std::make_shared<const GridDisk>(2.0, h, 4);
  const SourceMeasure m = measures::lebesgue_with_atoms({{{0.0, 0.0}, 2.0 * kPi * 0.25}}, 0.5);
  const DiscreteRHS rhs = discretize_measure(m, *grid);
  const double g = w_c(RadialProfile::unit(), 0.25, 2.0).value;
  for (auto _ : state) {
    const SolveResult s = solve_dirichlet(grid, rhs, [g](Vec2) { return g; });
    state.counters["sweeps"] = s.sweeps;
  }
}
BENCHMARK(BM_SolveOneAtom)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_FitExpansion(benchmark::State& state) {
  auto model = [](Vec2 x) {
    const double q = 2.0 * x.x * x.x + 0.5 * x.y * x.y;
    return 0.5 * q + 0.15 * std::log(q) + x.x - 2.0;
  };
  const AnnulusSamples s = sample_annuli(model, {20.0, 40.0, 80.0, 160.0}, 256, AnnulusSamples::Source::ClosedForm);
  for (auto _ : state) benchmark::DoNotOptimize(fit_expansion(s));
}
BENCHMARK(BM_FitExpansion)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
