#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ntkm/features.hpp"
#include "ntkm/types.hpp"

namespace ntkm {

// Evaluator for the frozen-feature kernel K(x, x') = E_omega[g(x) g(x')].
// Empirical takes the exact mean over a finite ensemble; the analytic variant
// is the closed form for ReluDot features under standard Gaussian omega
// (the order-1 arc-cosine kernel) and stands in for infinite width.
class KernelSpec {
 public:
  enum class Variant { Empirical, AnalyticReluGaussian };

  static KernelSpec empirical(std::shared_ptr<const FeatureEnsemble> ensemble);
  static KernelSpec analytic_relu_gaussian(int dim);

  Variant variant() const noexcept { return variant_; }
  int dim() const noexcept { return dim_; }
  bool is_empirical() const noexcept { return variant_ == Variant::Empirical; }
  const FeatureEnsemble& ensemble() const;
  const std::shared_ptr<const FeatureEnsemble>& ensemble_ptr() const noexcept {
    return ensemble_;
  }

 private:
  KernelSpec(Variant variant, int dim,
             std::shared_ptr<const FeatureEnsemble> ensemble)
      : variant_(variant), dim_(dim), ensemble_(std::move(ensemble)) {}

  Variant variant_;
  int dim_;
  std::shared_ptr<const FeatureEnsemble> ensemble_;
};

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& x2);

// Cache of kernel values over one dataset, tagged with the dataset it was
// built from so manifests can prove which inputs produced it.
struct GramMatrix {
  Matrix values;                        // N x N, symmetric
  std::uint64_t dataset_fingerprint = 0;

  std::uint64_t fingerprint() const;
};

GramMatrix gram(const KernelSpec& spec, const Dataset& dataset);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
};

// Monte Carlo estimate of E[g(x) g(x2)] over fresh omega draws. Reproducible:
// the draws are addressed by (sampler.seed, sample index).
McEstimate mc_kernel_estimate(FeatureKind kind, const OmegaSampler& sampler,
                              const Vector& x, const Vector& x2,
                              long n_samples);

using HeadFn = std::function<Vector(const Vector&)>;

struct ExpectationCheckOptions {
  std::optional<Vector> reference;     // analytic value when known
  long reference_samples = 4'000'000;  // Monte Carlo reference otherwise
  std::uint64_t base_seed = 0x5eedf00dull;
};

struct ConvergenceReport {
  Vector reference;            // E[g_omega(x) head(omega)]
  std::vector<int> widths;
  int replicas = 0;
  std::vector<double> errors;  // max-abs gap per width, mean over replicas
};

// Builds R independent finite models per width with rows head(omega_h)/sqrt(H)
// and reports how far the replica-averaged outputs sit from the infinite
// model's value. The gap must shrink as R*H grows.
ConvergenceReport expectation_identity_check(
    FeatureKind kind, const OmegaSampler& sampler, const HeadFn& head_map,
    int head_dim, const Vector& x, const std::vector<int>& widths,
    int replicas, const ExpectationCheckOptions& options = {});

}  // namespace ntkm
