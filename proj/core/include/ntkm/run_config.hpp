#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntkm/dataset_gen.hpp"

namespace ntkm::bench {

// Ensemble width for one run cell. The infinite entry is the analytic-kernel
// stand-in for the infinite-width machine; it serializes as "inf".
struct WidthSpec {
  bool infinite = false;
  int h = 0;

  std::string label() const { return infinite ? "inf" : std::to_string(h); }
  static WidthSpec finite(int h) { return WidthSpec{false, h}; }
  static WidthSpec inf() { return WidthSpec{true, 0}; }
};

enum class ModelKind {
  MlpUnfrozen,        // two trainable layers, ADAM
  MlpFrozen,          // frozen features, SGD (explicit twin of KernelSgd)
  KernelSgd,          // dual machine, SGD dynamics
  KernelAdamStar,     // dual machine, ADAM* dynamics
  MlpFrozenAdam,      // frozen features, ADAM
  MlpFrozenAdamStar,  // frozen features, ADAM* (explicit twin of KernelAdamStar)
};

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
bool is_kernel_kind(ModelKind kind);

// ADAM-family and SGD cells take different step sizes by design; every other
// hyperparameter is shared.
struct BenchTrainParams {
  double alpha_sgd = 0.1;
  double alpha_adam = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long steps = 1000;
  std::uint64_t seed = 1;
};

struct RunConfig {
  Task task = Task::TeacherRegression;
  std::vector<WidthSpec> widths;        // ascending, "inf" last
  std::vector<ModelKind> model_kinds;
  BenchTrainParams train;
  long n_train = 64;
  long n_eval = 32;
  int input_dim = 8;
  int output_dim = 1;
  int n_seeds = 1;                      // cells replicate over seed, seed+1, ...
  long eval_every = 10;
  std::string output_dir;               // optional; the CLI --out flag overrides

  void validate() const;
  // Sorted-key JSON echo; fingerprinted for the run id and embedded in the
  // manifest.
  std::string canonical_json() const;
};

// Strict parse: unknown keys anywhere are rejected.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

}  // namespace ntkm::bench
