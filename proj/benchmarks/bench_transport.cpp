#include <benchmark/benchmark.h>

#include "ntkm/transport.hpp"

using namespace ntkm;

namespace {

void BM_ModelIntegral1D(benchmark::State& state) {
  const auto instances = canonical_transport_instances();
  const TransportInstance& inst = instances[1];  // s1 tanh head
  const TransportHeadFn head = head_fn(inst.head);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model_integral(inst.rho, FeatureKind::TanhDot, head,
                                            inst.head.output_dim(), inst.x, inst.grid));
  }
}
BENCHMARK(BM_ModelIntegral1D)->Unit(benchmark::kMillisecond);

void BM_EquivalenceError2D(benchmark::State& state) {
  const auto instances = canonical_transport_instances();
  const TransportInstance& inst = instances[7];  // s2 linear field, tanh head
  for (auto _ : state) {
    benchmark::DoNotOptimize(equivalence_error(inst.rho, FeatureKind::TanhDot, inst.head,
                                               inst.field, inst.x, 1e-2, inst.grid));
  }
}
BENCHMARK(BM_EquivalenceError2D)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
