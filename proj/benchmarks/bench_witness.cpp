#include <benchmark/benchmark.h>

#include "optomech/witness.hpp"

using namespace optomech;

namespace {

WitnessInputs inputs(double alpha) {
  WitnessInputs in;
  in.g0_tau = 0.1;
  in.alpha = alpha;
  in.t_s = 0.3;
  in.delta_x = 0.2;
  in.sigma_lo = 0.01;
  return in;
}

void BM_WitnessAnalytic(benchmark::State& state) {
  const auto in = inputs(3.0);
  for (auto _ : state) benchmark::DoNotOptimize(witness_analytic(in).margin);
}
BENCHMARK(BM_WitnessAnalytic);

void BM_WitnessFockOracle(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0));
  const auto in = inputs(alpha);
  const auto cutoff = default_cutoff(alpha);
  for (auto _ : state) benchmark::DoNotOptimize(witness_fock_oracle(in, cutoff).margin);
}
BENCHMARK(BM_WitnessFockOracle)->Arg(1)->Arg(3)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
