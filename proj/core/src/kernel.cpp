#include "ntkm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ntkm/fingerprint.hpp"
#include "ntkm/rng.hpp"

namespace ntkm {

KernelSpec KernelSpec::empirical(std::shared_ptr<const FeatureEnsemble> ensemble) {
  if (!ensemble) {
    throw InvalidArgumentError("empirical kernel needs an ensemble");
  }
  const int dim = ensemble->dim();
  return KernelSpec(Variant::Empirical, dim, std::move(ensemble));
}

KernelSpec KernelSpec::analytic_relu_gaussian(int dim) {
  if (dim < 1) {
    throw InvalidArgumentError("analytic kernel dim must be >= 1");
  }
  return KernelSpec(Variant::AnalyticReluGaussian, dim, nullptr);
}

const FeatureEnsemble& KernelSpec::ensemble() const {
  if (!ensemble_) {
    throw InvalidArgumentError("analytic kernel has no ensemble");
  }
  return *ensemble_;
}

namespace {

// Plain left-to-right mean of a[h]*b[h]. Kept scalar on purpose: the
// empirical kernel is contractually the literal finite expectation, and the
// per-pair loop oracle in the tests must reproduce it bit for bit.
double empirical_mean_product(const Vector& a, const Vector& b) {
  double sum = 0.0;
  for (Eigen::Index h = 0; h < a.size(); ++h) sum += a[h] * b[h];
  return sum / static_cast<double>(a.size());
}

// Order-1 arc-cosine kernel: E[relu(w.x) relu(w.x')] for w ~ N(0, I).
double arc_cosine_relu(const Vector& x, const Vector& x2) {
  const double nx = x.norm();
  const double nx2 = x2.norm();
  if (nx == 0.0 || nx2 == 0.0) return 0.0;
  // Clamp guards arccos against floating-point overshoot on (anti)parallel inputs.
  const double c = std::clamp(x.dot(x2) / (nx * nx2), -1.0, 1.0);
  const double phi = std::acos(c);
  return nx * nx2 * (std::sin(phi) + (std::numbers::pi - phi) * std::cos(phi)) /
         (2.0 * std::numbers::pi);
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& x2) {
  if (x.size() != spec.dim() || x2.size() != spec.dim()) {
    throw DimensionError("kernel_eval: inputs have lengths " +
                         std::to_string(x.size()) + ", " + std::to_string(x2.size()) +
                         "; kernel dim is " + std::to_string(spec.dim()));
  }
  switch (spec.variant()) {
    case KernelSpec::Variant::Empirical: {
      const FeatureEnsemble& ens = spec.ensemble();
      const Vector a = feature_row(ens, x);
      const Vector b = feature_row(ens, x2);
      return empirical_mean_product(a, b);
    }
    case KernelSpec::Variant::AnalyticReluGaussian:
      return arc_cosine_relu(x, x2);
  }
  throw InvalidArgumentError("unknown kernel variant");
}

std::uint64_t GramMatrix::fingerprint() const {
  Fnv1a h;
  h.update("gram v1\n");
  h.update(fingerprint_hex(dataset_fingerprint) + "\n");
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      h.update(hexfloat(values(i, j)) + " ");
    }
    h.update("\n");
  }
  return h.digest();
}

GramMatrix gram(const KernelSpec& spec, const Dataset& dataset) {
  const auto n = static_cast<Eigen::Index>(dataset.size());
  GramMatrix out;
  out.values.resize(n, n);
  out.dataset_fingerprint = dataset_fingerprint(dataset);

  if (spec.is_empirical()) {
    // One pass over the feature rows; pairs then cost O(H) each.
    const FeatureEnsemble& ens = spec.ensemble();
    std::vector<Vector> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      rows[static_cast<std::size_t>(i)] = feature_row(ens, dataset[static_cast<std::size_t>(i)].x);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double v = empirical_mean_product(rows[static_cast<std::size_t>(i)],
                                                rows[static_cast<std::size_t>(j)]);
        out.values(i, j) = v;
        out.values(j, i) = v;
      }
    }
    return out;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = kernel_eval(spec, dataset[static_cast<std::size_t>(i)].x,
                                   dataset[static_cast<std::size_t>(j)].x);
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  }
  return out;
}

McEstimate mc_kernel_estimate(FeatureKind kind, const OmegaSampler& sampler,
                              const Vector& x, const Vector& x2,
                              long n_samples) {
  if (n_samples < 2) {
    throw InvalidArgumentError("mc_kernel_estimate: n_samples must be >= 2");
  }
  if (x.size() != sampler.dim || x2.size() != sampler.dim) {
    throw DimensionError("mc_kernel_estimate: input lengths do not match sampler dim");
  }
  Vector omega(sampler.dim);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    for (int c = 0; c < sampler.dim; ++c) {
      omega[c] = sampler.draw(static_cast<int>(i), c);
    }
    const double v = eval_feature(kind, omega, x) * eval_feature(kind, omega, x2);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return McEstimate{mean, std::sqrt(var / n), n_samples};
}

ConvergenceReport expectation_identity_check(
    FeatureKind kind, const OmegaSampler& sampler, const HeadFn& head_map,
    int head_dim, const Vector& x, const std::vector<int>& widths,
    int replicas, const ExpectationCheckOptions& options) {
  if (head_dim < 1) throw InvalidArgumentError("head_dim must be >= 1");
  if (replicas < 1) throw InvalidArgumentError("replicas must be >= 1");
  if (x.size() != sampler.dim) {
    throw DimensionError("expectation_identity_check: x does not match sampler dim");
  }

  ConvergenceReport report;
  report.widths = widths;
  report.replicas = replicas;

  if (options.reference.has_value()) {
    report.reference = *options.reference;
  } else {
    // Large-sample Monte Carlo reference on its own stream.
    Vector acc = Vector::Zero(head_dim);
    Vector omega(sampler.dim);
    OmegaSampler ref_sampler = sampler;
    ref_sampler.seed = splitmix64(options.base_seed ^ 0x7ef5ull);
    for (long i = 0; i < options.reference_samples; ++i) {
      for (int c = 0; c < sampler.dim; ++c) {
        omega[c] = ref_sampler.draw(static_cast<int>(i), c);
      }
      acc += eval_feature(kind, omega, x) * head_map(omega);
    }
    report.reference = acc / static_cast<double>(options.reference_samples);
  }

  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    const int width = widths[wi];
    if (width < 1) throw InvalidArgumentError("widths must be >= 1");
    Vector mean_output = Vector::Zero(head_dim);
    for (int r = 0; r < replicas; ++r) {
      OmegaSampler rep = sampler;
      rep.seed = splitmix64(splitmix64(options.base_seed + wi) ^
                            static_cast<std::uint64_t>(r));
      const FeatureEnsemble ens = sample_ensemble(rep, kind, width);
      // Finite model with rows M_h = head(omega_h)/sqrt(H); its output at x
      // is the plain average of g_h(x) head(omega_h).
      Vector out = Vector::Zero(head_dim);
      for (int h = 0; h < width; ++h) {
        const Vector omega = ens.omegas().row(h).transpose();
        out += eval_feature(kind, omega, x) * head_map(omega);
      }
      mean_output += out / static_cast<double>(width);
    }
    mean_output /= static_cast<double>(replicas);
    report.errors.push_back((mean_output - report.reference).cwiseAbs().maxCoeff());
  }
  return report;
}

}  // namespace ntkm
