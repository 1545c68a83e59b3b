#include <benchmark/benchmark.h>

#include "superrad/correlations.hpp"
#include "superrad/coupling.hpp"
#include "superrad/dynamics.hpp"
#include "superrad/emitters.hpp"
#include "superrad/montecarlo.hpp"

using namespace superrad;

namespace {

DecayMatrix free_space(int n_side) {
  LatticeSpec spec;
  spec.n_side = n_side;
  return build_matrices(build_square_lattice(spec, 708.9), FreeSpace{}).decay;
}

void BM_G2Direct(benchmark::State& state) {
  const auto m = free_space(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(g2_direct(m).value);
  state.SetComplexityN(state.range(0) * state.range(0));
}

void BM_G2Spectral(benchmark::State& state) {
  const auto m = free_space(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(g2_spectral(m).value);
  state.SetComplexityN(state.range(0) * state.range(0));
}

void BM_FreeSpaceMatrix(benchmark::State& state) {
  LatticeSpec spec;
  spec.n_side = static_cast<int>(state.range(0));
  const auto array = build_square_lattice(spec, 708.9);
  for (auto _ : state) benchmark::DoNotOptimize(build_matrices(array, FreeSpace{}).decay.rates().data());
}

void BM_Lindblad(benchmark::State& state) {
  const auto m = build_matrices(static_cast<std::size_t>(state.range(0)), SingleModeBIC{1.0, 0.8179});
  for (auto _ : state) benchmark::DoNotOptimize(lindblad_rate_trace(m.decay, m.coupling, 1.5, 60).rate.back());
}

void BM_Ladder(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ladder_rate_trace(n, 1.0, 0.8179, 5.0, 500).rate.back());
}

void BM_OrientationDisorder(benchmark::State& state) {
  DisorderConfig c;
  c.environment = FreeSpace{};
  c.mode = OrientationMode{60.0, 100};
  c.n_samples = static_cast<std::size_t>(state.range(0));
  c.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_disorder(c).stats.mean);
}

}  // namespace

BENCHMARK(BM_G2Direct)->DenseRange(3, 11, 2)->Complexity();
BENCHMARK(BM_G2Spectral)->DenseRange(3, 11, 2)->Complexity();
BENCHMARK(BM_FreeSpaceMatrix)->DenseRange(3, 11, 4);
BENCHMARK(BM_Lindblad)->DenseRange(2, 8, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ladder)->Arg(9)->Arg(121)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrientationDisorder)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
