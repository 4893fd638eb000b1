#include <benchmark/benchmark.h>

#include "ntkm/kernel.hpp"
#include "ntkm/rng.hpp"

using namespace ntkm;

namespace {

Dataset random_dataset(std::uint64_t seed, int n, int dim) {
  CounterRng rng(seed, 0);
  std::vector<Example> examples;
  for (int i = 0; i < n; ++i) {
    Vector x(dim), y(1);
    for (int d = 0; d < dim; ++d) x[d] = rng.next_gaussian();
    y[0] = rng.next_gaussian();
    examples.push_back({x, y});
  }
  return Dataset(std::move(examples), "bench");
}

void BM_KernelEvalEmpirical(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, 8, 1};
  auto ens = std::make_shared<const FeatureEnsemble>(
      sample_ensemble(sampler, FeatureKind::ReluDot, width));
  const KernelSpec spec = KernelSpec::empirical(ens);
  CounterRng rng(2, 0);
  Vector x(8), x2(8);
  for (int d = 0; d < 8; ++d) {
    x[d] = rng.next_gaussian();
    x2[d] = rng.next_gaussian();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_eval(spec, x, x2));
  }
}
BENCHMARK(BM_KernelEvalEmpirical)->Arg(64)->Arg(256)->Arg(1024);

void BM_KernelEvalAnalytic(benchmark::State& state) {
  const KernelSpec spec = KernelSpec::analytic_relu_gaussian(8);
  CounterRng rng(2, 0);
  Vector x(8), x2(8);
  for (int d = 0; d < 8; ++d) {
    x[d] = rng.next_gaussian();
    x2[d] = rng.next_gaussian();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_eval(spec, x, x2));
  }
}
BENCHMARK(BM_KernelEvalAnalytic);

void BM_Gram(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, 8, 1};
  auto ens = std::make_shared<const FeatureEnsemble>(
      sample_ensemble(sampler, FeatureKind::ReluDot, 256));
  const KernelSpec spec = KernelSpec::empirical(ens);
  const Dataset ds = random_dataset(3, n, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram(spec, ds));
  }
}
BENCHMARK(BM_Gram)->Arg(16)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
