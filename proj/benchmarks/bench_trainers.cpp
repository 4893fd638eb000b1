#include <benchmark/benchmark.h>

#include "ntkm/rng.hpp"
#include "ntkm/trainers.hpp"

using namespace ntkm;

namespace {

Dataset random_dataset(std::uint64_t seed, int n, int dim, int out) {
  CounterRng rng(seed, 0);
  std::vector<Example> examples;
  for (int i = 0; i < n; ++i) {
    Vector x(dim), y(out);
    for (int d = 0; d < dim; ++d) x[d] = rng.next_gaussian();
    for (int e = 0; e < out; ++e) y[e] = rng.next_gaussian();
    examples.push_back({x, y});
  }
  return Dataset(std::move(examples), "bench");
}

// Whole-run cost of the dual machine; doubling steps should roughly quadruple
// time (O(t^2) coefficient touches against cached kernel entries).
void BM_KernelMachineRun(benchmark::State& state) {
  const long steps = state.range(0);
  const Dataset ds = random_dataset(7, 32, 8, 2);
  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, 8, 5};
  auto ens = std::make_shared<const FeatureEnsemble>(
      sample_ensemble(sampler, FeatureKind::ReluDot, 256));
  TrainConfig config;
  config.alpha = 1e-3;
  config.steps = steps;

  for (auto _ : state) {
    KernelMachine machine(KernelSpec::empirical(ens), config, TrainerMode::AdamStar, 2);
    for (long t = 1; t <= steps; ++t) machine.step(ds.example_for_step(t), LossSpec{});
    benchmark::DoNotOptimize(machine.step_count());
  }
}
BENCHMARK(BM_KernelMachineRun)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000)
    ->Unit(benchmark::kMillisecond);

void BM_FrozenTrainerRun(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const Dataset ds = random_dataset(7, 32, 8, 2);
  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, 8, 5};
  auto ens = std::make_shared<const FeatureEnsemble>(
      sample_ensemble(sampler, FeatureKind::ReluDot, width));
  TrainConfig config;
  config.alpha = 1e-3;
  config.steps = 500;

  for (auto _ : state) {
    benchmark::DoNotOptimize(
        train_finite_frozen(ens, ds, LossSpec{}, OptimizerKind::AdamStar, config));
  }
}
BENCHMARK(BM_FrozenTrainerRun)->Arg(64)->Arg(256)->Arg(1024)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
