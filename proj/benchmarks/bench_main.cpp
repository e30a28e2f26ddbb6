#include <benchmark/benchmark.h>

#include <vector>

#include "qsense/dispersion.hpp"
#include "qsense/elements.hpp"
#include "qsense/metrology.hpp"
#include "qsense/oam.hpp"
#include "qsense/sources.hpp"

using namespace qsense;

static void BM_BeamSplitterNoon(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = ModeLabel::path(0);
  const auto b = ModeLabel::path(1);
  auto space = FockSpace::make({a, b}, n);
  const auto psi = StateVector::basis(space, space->state({{a, n / 2}, {b, n - n / 2}}));
  for (auto _ : state) benchmark::DoNotOptimize(apply_beam_splitter(psi, a, b));
}
BENCHMARK(BM_BeamSplitterNoon)->Arg(2)->Arg(8)->Arg(32);

static void BM_LgProjection(benchmark::State& state) {
  const auto grid = PolarGrid::standard();
  const auto object = make_letter_mask(grid, 'F', 3.0);
  const ProjectionBasis basis{.l_max = static_cast<int>(state.range(0)), .p_max = 2};
  for (auto _ : state) benchmark::DoNotOptimize(project_object(object, basis));
}
BENCHMARK(BM_LgProjection)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_HomInterferogram(benchmark::State& state) {
  const double sigma = 1e14;
  const auto spectrum = BiphotonSpectrum::gaussian(2.4e15, sigma, static_cast<std::size_t>(state.range(0)));
  std::vector<double> delays;
  for (int i = 0; i < 401; ++i) delays.push_back((i - 200) / (40 * sigma));
  for (auto _ : state) benchmark::DoNotOptimize(hom_interferogram(spectrum, {}, delays));
}
BENCHMARK(BM_HomInterferogram)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_MonteCarloNoon(benchmark::State& state) {
  const auto protocol = noon_protocol(4);
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(protocol, kPi / 8, 100, 100, 7));
}
BENCHMARK(BM_MonteCarloNoon)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
