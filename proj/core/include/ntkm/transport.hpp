#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ntkm/features.hpp"
#include "ntkm/types.hpp"

namespace ntkm {

// Isotropic Gaussian density over feature parameters. Totally supported, with
// an analytic score, which is exactly what the head-reweighting factor needs.
struct DensitySpec {
  Vector mean;         // length S
  double sigma = 1.0;  // > 0

  int dim() const noexcept { return static_cast<int>(mean.size()); }
  double density(const Vector& omega) const;
  // grad log rho = -(omega - mean) / sigma^2
  Vector score(const Vector& omega) const;
  void validate() const;
};

// Velocity field the density flows along. Divergence is closed-form by
// construction: 0 for a constant field, trace(A) for a linear one.
class VectorFieldSpec {
 public:
  enum class Kind { Constant, Linear };

  static VectorFieldSpec constant(Vector b);
  static VectorFieldSpec linear(Matrix a, Vector b);  // V(w) = A w + b

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return static_cast<int>(b_.size()); }
  Vector value(const Vector& omega) const;
  double divergence() const noexcept { return divergence_; }

 private:
  VectorFieldSpec(Kind kind, Matrix a, Vector b, double div)
      : kind_(kind), a_(std::move(a)), b_(std::move(b)), divergence_(div) {}

  Kind kind_;
  Matrix a_;  // S x S, Linear only
  Vector b_;  // S
  double divergence_;
};

// Smooth head map omega -> R^E.
class HeadMapSpec {
 public:
  enum class Kind { Constant, TanhLinear };

  static HeadMapSpec constant(Vector c);
  static HeadMapSpec tanh_linear(Matrix w);  // out_e = tanh(W_e . omega)

  Kind kind() const noexcept { return kind_; }
  int output_dim() const noexcept;
  Vector eval(const Vector& omega) const;

 private:
  HeadMapSpec(Kind kind, Matrix w, Vector c)
      : kind_(kind), w_(std::move(w)), c_(std::move(c)) {}

  Kind kind_;
  Matrix w_;  // E x S, TanhLinear only
  Vector c_;  // E, Constant only
};

using TransportHeadFn = std::function<Vector(const Vector&)>;

TransportHeadFn head_fn(const HeadMapSpec& head);

// Head map after one continuity-equation step: the base head multiplied
// pointwise by (1 - alpha * (div V + V . score)). Lazily evaluated.
TransportHeadFn reweight_head(const HeadMapSpec& head, const DensitySpec& rho,
                              const VectorFieldSpec& field, double alpha);

// Tensor-product midpoint rule centered on the density mean, truncated at
// half_width sigmas per axis. At the 8-sigma default the discarded Gaussian
// mass is below 1e-14.
struct QuadratureGrid {
  int dim = 1;             // S, 1 or 2
  double half_width = 8.0;  // in sigma units
  int points_per_axis = 2001;

  void validate() const;
};

// Quadrature value of integral rho(w) g_w(x) head(w) dw. Feature kind must be
// TanhDot: the pushforward side differentiates through g in omega, and the
// ReLU kink would break the first-order argument being tested.
Vector model_integral(const DensitySpec& rho, FeatureKind g,
                      const TransportHeadFn& head, int head_dim, const Vector& x,
                      const QuadratureGrid& grid);

// Same integral with every particle moved one step along the field:
// integral rho(w) g_{w+alpha V(w)}(x) head(w + alpha V(w)) dw.
Vector pushforward_integral(const DensitySpec& rho, FeatureKind g,
                            const TransportHeadFn& head, int head_dim,
                            const VectorFieldSpec& field, double alpha,
                            const Vector& x, const QuadratureGrid& grid);

// Max-abs gap between the moved-particles model and the reweighted-head
// model at step size alpha. O(alpha^2) when the update translation is right.
double equivalence_error(const DensitySpec& rho, FeatureKind g,
                         const HeadMapSpec& head, const VectorFieldSpec& field,
                         const Vector& x, double alpha, const QuadratureGrid& grid);

// integral of rho(w) (1 - alpha (div V + V . score)) dw. The continuity update
// conserves probability mass, so this must stay 1.
double mass_after_update(const DensitySpec& rho, const VectorFieldSpec& field,
                         double alpha, const QuadratureGrid& grid);

// One named equivalence-check configuration.
struct TransportInstance {
  std::string name;
  DensitySpec rho;
  VectorFieldSpec field;
  HeadMapSpec head;
  Vector x;
  QuadratureGrid grid;
};

// The eight canonical instances: {constant, linear} fields x {constant,
// tanh-linear} heads x S in {1, 2}. Means are offset from zero so no
// odd-symmetry cancellation hides a scaling failure.
std::vector<TransportInstance> canonical_transport_instances();

struct TransportSweepInstanceResult {
  std::string name;
  std::vector<double> alphas;
  std::vector<double> errors;
  double slope = 0.0;       // log-log fit of error vs alpha
  double mass_error = 0.0;  // |mass - 1| at the largest alpha
};

struct TransportSweepResult {
  std::vector<TransportSweepInstanceResult> instances;
};

// Dyadic alpha sweep alpha_max, alpha_max/2, ... over the canonical instances.
TransportSweepResult transport_sweep(double alpha_max, int levels);

}  // namespace ntkm
