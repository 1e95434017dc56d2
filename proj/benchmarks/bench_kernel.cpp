#include <benchmark/benchmark.h>

#include "optomech/decoherence.hpp"
#include "optomech/system.hpp"

using namespace optomech;

namespace {

PhaseKernel kernel(DecoherenceModel model, Quadrature policy) {
  const SystemParams p = preset("trampoline-60ng");
  return PhaseKernel{std::move(model), 100.0, p.omega_m, p.g0_tau(), p.x0(), policy};
}

void BM_XiStandardClosedForm(benchmark::State& state) {
  const auto k = kernel(StandardModel{1e30}, Quadrature::Auto);
  for (auto _ : state) benchmark::DoNotOptimize(xi(k, 1.0));
}
BENCHMARK(BM_XiStandardClosedForm);

void BM_XiStandardQuadrature(benchmark::State& state) {
  const auto k = kernel(StandardModel{1e30}, Quadrature::Always);
  for (auto _ : state) benchmark::DoNotOptimize(xi(k, 1.0));
}
BENCHMARK(BM_XiStandardQuadrature);

void BM_XiDiosiPenrose(benchmark::State& state) {
  const SystemParams p = preset("trampoline-60ng");
  const auto k = kernel(diosi_penrose_nuclear(p.mass_kg, 28.0), Quadrature::Auto);
  for (auto _ : state) benchmark::DoNotOptimize(xi(k, 1.0));
}
BENCHMARK(BM_XiDiosiPenrose);

}  // namespace

BENCHMARK_MAIN();
