#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ntkm/types.hpp"

namespace ntkm {

// Scalar feature submodels g_omega(x).
enum class FeatureKind {
  ReluDot,  // max(0, omega . x), subgradient 0 at the kink
  TanhDot,  // tanh(omega . x), differentiable in omega everywhere
};

const char* to_string(FeatureKind kind);

// Distribution the feature parameters are drawn from. Sampling is
// counter-based: the draw for (seed, row, coordinate) never depends on the
// requested width, so widening an ensemble preserves its existing rows.
struct OmegaSampler {
  enum class Kind { StandardGaussian };
  Kind kind = Kind::StandardGaussian;
  int dim = 0;             // S, length of each omega
  std::uint64_t seed = 0;

  // The coordinate draw addressed by (row h, coordinate c).
  double draw(int h, int c) const;
};

// H frozen parameter vectors plus the feature kind that interprets them.
// Immutable after construction; trainers only ever read it.
class FeatureEnsemble {
 public:
  FeatureEnsemble(Matrix omegas, FeatureKind kind);

  int width() const noexcept { return static_cast<int>(omegas_.rows()); }  // H
  int dim() const noexcept { return static_cast<int>(omegas_.cols()); }    // S
  FeatureKind feature_kind() const noexcept { return kind_; }
  const Matrix& omegas() const noexcept { return omegas_; }

  // Canonical text dump: kind, S, H, then row-major omegas in hexfloat.
  std::string serialize() const;
  std::uint64_t fingerprint() const;

 private:
  Matrix omegas_;  // H x S, row h is omega_h
  FeatureKind kind_;
};

FeatureEnsemble sample_ensemble(const OmegaSampler& sampler, FeatureKind kind,
                                int width);

double eval_feature(FeatureKind kind, const Vector& omega, const Vector& x);

// Derivative of g_omega(x) with respect to the pre-activation omega . x.
double eval_feature_deriv(FeatureKind kind, double preactivation);

// Row of feature values (g_{omega_h}(x))_h for one input.
Vector feature_row(const FeatureEnsemble& ensemble, const Vector& x);

// N x H matrix with entry (i, h) = g_{omega_h}(x_i). Raw values; the 1/sqrt(H)
// scaling belongs to the model, not the features.
Matrix feature_matrix(const FeatureEnsemble& ensemble, const Dataset& dataset);

}  // namespace ntkm
