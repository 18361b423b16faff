#include <benchmark/benchmark.h>

#include "qrc/engine.hpp"
#include "qrc/gaussian.hpp"
#include "qrc/network.hpp"
#include "qrc/rng.hpp"
#include "qrc/tasks.hpp"

namespace {

using namespace qrc;

NetworkSpec bench_reservoir(int n, Rng& rng) { return random_reservoir(n, 0.2, 0.25, rng); }

CouplingVector bench_coupling(int n, int m, Rng& rng) {
  CouplingVector coupling;
  coupling.strengths = Mat::Zero(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) coupling.strengths(i, j) = rng.uniform(0.01, 0.2);
  return coupling;
}

void BM_Propagator(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  const NetworkSpec reservoir = bench_reservoir(n, rng);
  const CouplingVector coupling = bench_coupling(n, 1, rng);
  const NetworkSpec joint = assemble_joint(reservoir, coupling, 0.25);
  const Mat v = potential_matrix(joint);
  for (auto _ : state) benchmark::DoNotOptimize(propagator(v, 8.0 * M_PI));
}
BENCHMARK(BM_Propagator)->Arg(4)->Arg(8)->Arg(16);

void BM_EngineStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(11);
  const NetworkSpec reservoir = bench_reservoir(n, rng);
  const CouplingVector coupling = bench_coupling(n, 1, rng);
  const NetworkSpec joint = assemble_joint(reservoir, coupling, 0.25);
  const PropagatorBlocks blocks = partition_blocks(propagator(potential_matrix(joint), 8.0 * M_PI), n, 1);
  EngineState engine = initialize(reservoir, 4);
  const GaussianState input = make_single_mode_state(1.0, 0.3, 0.0, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(step(engine, input, blocks));
}
BENCHMARK(BM_EngineStep)->Arg(4)->Arg(8);

void BM_Fidelity(benchmark::State& state) {
  Rng rng(13);
  const GaussianState a = random_zero_mean_state(2, {0.0, 10.0}, {0.0, 1.0}, 0.25, rng);
  const GaussianState b = random_zero_mean_state(2, {0.0, 10.0}, {0.0, 1.0}, 0.25, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fidelity(a, b));
}
BENCHMARK(BM_Fidelity);

void BM_FidelitySingleMode(benchmark::State& state) {
  Rng rng(17);
  const GaussianState a = random_zero_mean_state(1, {0.0, 10.0}, {0.0, 1.0}, 0.25, rng);
  const GaussianState b = random_zero_mean_state(1, {0.0, 10.0}, {0.0, 1.0}, 0.25, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fidelity(a, b));
}
BENCHMARK(BM_FidelitySingleMode);

}  // namespace

BENCHMARK_MAIN();
