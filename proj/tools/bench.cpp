// bench: experiment harness CLI.
//
//   bench run             --config <path.json> --out <dir>
//   bench transport-sweep --alpha-max <f> --levels <k> --out <dir>
//   bench kernel-verify   --kind relu --samples <n> --out <dir>
//   bench oracle-check    --width <H> --steps <t> --mode <sgd|adamstar> --seed <s>
//
// BENCH_THREADS caps the number of grid cells running in parallel.
// Exit code is 0 only if every cell / check passed.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "ntkm/csv.hpp"
#include "ntkm/dataset_gen.hpp"
#include "ntkm/experiment.hpp"
#include "ntkm/fingerprint.hpp"
#include "ntkm/numerics.hpp"
#include "ntkm/rng.hpp"
#include "ntkm/trainers.hpp"
#include "ntkm/transport.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ntkm;

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  bench::RunConfig config = bench::load_run_config(config_path);
  const std::string out = out_dir.empty() ? config.output_dir : out_dir;
  if (out.empty()) {
    std::fprintf(stderr, "bench run: no output directory (config output_dir or --out)\n");
    return 2;
  }
  const bench::RunManifest manifest = bench::run_experiment(config, out);
  int failed = 0;
  for (const bench::CellResult& cell : manifest.cells) {
    if (cell.failed) {
      ++failed;
      std::printf("FAILED %s width=%s seed=%llu: %s\n", bench::to_string(cell.kind),
                  cell.width.label().c_str(),
                  static_cast<unsigned long long>(cell.seed), cell.error.c_str());
    }
  }
  std::printf("run %s: %zu cells, %d failed, outputs in %s\n", manifest.run_id.c_str(),
              manifest.cells.size(), failed, out.c_str());
  return failed == 0 ? 0 : 1;
}

int cmd_transport_sweep(double alpha_max, int levels, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const TransportSweepResult sweep = transport_sweep(alpha_max, levels);

  std::string detail = "instance,alpha,equivalence_error\n";
  std::string summary = "instance,slope,mass_error\n";
  bool ok = true;
  for (const auto& inst : sweep.instances) {
    for (std::size_t i = 0; i < inst.alphas.size(); ++i) {
      detail += inst.name + "," + bench::format_double(inst.alphas[i]) + "," +
                bench::format_double(inst.errors[i]) + "\n";
    }
    summary += inst.name + "," + bench::format_double(inst.slope) + "," +
               bench::format_double(inst.mass_error) + "\n";
    const bool inst_ok = inst.slope >= 1.9 && inst.mass_error <= 1e-10;
    ok = ok && inst_ok;
    std::printf("%-34s slope=%.4f mass_error=%.3e %s\n", inst.name.c_str(), inst.slope,
                inst.mass_error, inst_ok ? "ok" : "FAILED");
  }
  bench::write_text_atomic((fs::path(out_dir) / "transport_sweep.csv").string(), detail);
  bench::write_text_atomic((fs::path(out_dir) / "transport_summary.csv").string(), summary);
  return ok ? 0 : 1;
}

int cmd_kernel_verify(const std::string& kind, long samples, const std::string& out_dir) {
  if (kind != "relu") {
    std::fprintf(stderr, "kernel-verify: only --kind relu has a closed form\n");
    return 2;
  }
  fs::create_directories(out_dir);
  constexpr int kDim = 4;
  constexpr int kPairs = 10;

  std::string csv = "pair,analytic,mc_mean,mc_std_error,z\n";
  bool ok = true;
  const KernelSpec analytic = KernelSpec::analytic_relu_gaussian(kDim);
  for (int p = 0; p < kPairs; ++p) {
    CounterRng rng(0xC0DEull + static_cast<std::uint64_t>(p), 3);
    Vector x(kDim), x2(kDim);
    for (int d = 0; d < kDim; ++d) {
      x[d] = rng.next_gaussian();
      x2[d] = rng.next_gaussian();
    }
    const double closed = kernel_eval(analytic, x, x2);
    const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, kDim,
                               0xFEEDull + static_cast<std::uint64_t>(p)};
    const McEstimate mc = mc_kernel_estimate(FeatureKind::ReluDot, sampler, x, x2, samples);
    const double z = mc.std_error > 0.0 ? std::abs(mc.mean - closed) / mc.std_error : 0.0;
    ok = ok && z <= 5.0;
    csv += std::to_string(p) + "," + bench::format_double(closed) + "," +
           bench::format_double(mc.mean) + "," + bench::format_double(mc.std_error) + "," +
           bench::format_double(z) + "\n";
    std::printf("pair %d: analytic=%.9f mc=%.9f stderr=%.3e z=%.2f\n", p, closed, mc.mean,
                mc.std_error, z);
  }
  bench::write_text_atomic((fs::path(out_dir) / "kernel_verify.csv").string(), csv);
  std::printf("kernel-verify: %s\n", ok ? "ok (all within 5 standard errors)" : "FAILED");
  return ok ? 0 : 1;
}

int cmd_oracle_check(int width, long steps, const std::string& mode, std::uint64_t seed) {
  const bool adamstar = mode == "adamstar";
  if (!adamstar && mode != "sgd") {
    std::fprintf(stderr, "oracle-check: --mode must be sgd or adamstar\n");
    return 2;
  }
  constexpr int kInputDim = 6;
  constexpr int kOutputDim = 2;
  constexpr long kHeldOut = 10;

  const Dataset full = bench::generate_dataset(bench::Task::TeacherRegression,
                                               32 + kHeldOut, bench::data_seed(seed),
                                               kInputDim, kOutputDim);
  std::vector<Example> train_ex(full.examples().begin(), full.examples().end() - kHeldOut);
  const Dataset train_ds(std::move(train_ex), full.name() + "-train");

  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, kInputDim,
                             bench::ensemble_seed(seed)};
  auto ensemble = std::make_shared<const FeatureEnsemble>(
      sample_ensemble(sampler, FeatureKind::ReluDot, width));

  TrainConfig tc;
  tc.alpha = adamstar ? 1e-3 : 1e-1;
  tc.steps = steps;
  tc.seed = seed;

  const LossSpec loss;
  KernelMachine machine(KernelSpec::empirical(ensemble), tc,
                        adamstar ? TrainerMode::AdamStar : TrainerMode::Sgd, kOutputDim);
  for (long t = 1; t <= steps; ++t) machine.step(train_ds.example_for_step(t), loss);

  const FiniteModel oracle = train_finite_frozen(
      ensemble, train_ds, loss, adamstar ? OptimizerKind::AdamStar : OptimizerKind::Sgd, tc);

  double max_rel = 0.0;
  auto compare = [&](const Vector& x) {
    const Vector a = machine.predict(x);
    const Vector b = oracle.predict(x);
    for (int e = 0; e < kOutputDim; ++e) {
      max_rel = std::max(max_rel, relative_error(a[e], b[e]));
    }
  };
  for (const Example& ex : train_ds.examples()) compare(ex.x);
  for (auto it = full.examples().end() - kHeldOut; it != full.examples().end(); ++it) {
    compare(it->x);
  }

  std::printf("oracle-check mode=%s width=%d steps=%ld seed=%llu max_rel_error=%.3e %s\n",
              mode.c_str(), width, steps, static_cast<unsigned long long>(seed), max_rel,
              max_rel <= 1e-9 ? "ok" : "FAILED");
  return max_rel <= 1e-9 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frozen-feature kernel machine benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "run a width-sweep experiment grid");
  run->add_option("--config", config_path, "JSON run config")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");

  double alpha_max = 1e-2;
  int levels = 3;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("transport-sweep",
                                   "dyadic alpha sweep of the density-update identity");
  sweep->add_option("--alpha-max", alpha_max, "largest step size")->required();
  sweep->add_option("--levels", levels, "number of dyadic levels")->required();
  sweep->add_option("--out", sweep_out, "output directory")->required();

  std::string kernel_kind = "relu";
  long samples = 1'000'000;
  std::string verify_out;
  auto* verify = app.add_subcommand("kernel-verify",
                                    "Monte Carlo check of the closed-form kernel");
  verify->add_option("--kind", kernel_kind, "feature kind (relu)")->required();
  verify->add_option("--samples", samples, "Monte Carlo samples")->required();
  verify->add_option("--out", verify_out, "output directory")->required();

  int width = 64;
  long steps = 200;
  std::string mode = "sgd";
  std::uint64_t seed = 1;
  auto* oracle = app.add_subcommand("oracle-check",
                                    "dual-vs-explicit trainer equivalence at one grid point");
  oracle->add_option("--width", width, "ensemble width H")->required();
  oracle->add_option("--steps", steps, "training steps")->required();
  oracle->add_option("--mode", mode, "sgd or adamstar")->required();
  oracle->add_option("--seed", seed, "seed")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (sweep->parsed()) return cmd_transport_sweep(alpha_max, levels, sweep_out);
    if (verify->parsed()) return cmd_kernel_verify(kernel_kind, samples, verify_out);
    if (oracle->parsed()) return cmd_oracle_check(width, steps, mode, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bench: %s\n", e.what());
    return 2;
  }
  return 2;
}
