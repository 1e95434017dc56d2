#include <benchmark/benchmark.h>

#include "optomech/protocol.hpp"
#include "optomech/system.hpp"

using namespace optomech;

namespace {

ProtocolConfig config(std::size_t shots) {
  ProtocolConfig c;
  c.params = preset("trampoline-60ng");
  c.params.alpha = 10.0;
  c.model = StandardModel{1e35};
  c.half_periods = 10;
  c.shots = shots;
  c.seed = 1;
  return c;
}

void BM_RunProtocol(benchmark::State& state) {
  const auto c = config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol(c).estimate.variance);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunProtocol)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_BuildTabulatedSampler(benchmark::State& state) {
  const SystemParams p = preset("trampoline-60ng");
  const double sx0 = p.g0_tau() * p.x0();
  const PhaseKernel k{DiosiPenrose{sx0, 4.65e-26, 1.29e12, 1.0}, 1000.0, p.omega_m, p.g0_tau(),
                      p.x0()};
  for (auto _ : state) benchmark::DoNotOptimize(build_phase_sampler(k).atom_weight());
}
BENCHMARK(BM_BuildTabulatedSampler)->Unit(benchmark::kMillisecond);

void BM_JointWitnessSampling(benchmark::State& state) {
  auto c = config(20000);
  c.params.omega_c *= 0.1 / c.params.g0_tau();
  c.params.alpha = 5.0;
  for (auto _ : state) benchmark::DoNotOptimize(joint_witness_sampling(c, 200).margin_std_error);
}
BENCHMARK(BM_JointWitnessSampling)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
