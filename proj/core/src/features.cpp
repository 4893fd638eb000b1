#include "ntkm/features.hpp"

#include <cmath>
#include <utility>

#include "ntkm/fingerprint.hpp"
#include "ntkm/rng.hpp"

namespace ntkm {

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::ReluDot: return "relu_dot";
    case FeatureKind::TanhDot: return "tanh_dot";
  }
  return "?";
}

double OmegaSampler::draw(int h, int c) const {
  // Only StandardGaussian exists; the switch keeps the extension point honest.
  switch (kind) {
    case Kind::StandardGaussian:
      return counter_gaussian(seed, static_cast<std::uint64_t>(h),
                              static_cast<std::uint64_t>(c));
  }
  throw InvalidArgumentError("unknown sampler kind");
}

FeatureEnsemble::FeatureEnsemble(Matrix omegas, FeatureKind kind)
    : omegas_(std::move(omegas)), kind_(kind) {
  if (omegas_.rows() < 1) {
    throw InvalidArgumentError("ensemble width must be >= 1");
  }
  if (omegas_.cols() < 1) {
    throw InvalidArgumentError("ensemble dim must be >= 1");
  }
  if (!omegas_.allFinite()) {
    throw InvalidArgumentError("ensemble has non-finite omegas");
  }
}

std::string FeatureEnsemble::serialize() const {
  std::string out = "ntkm-ensemble v1\n";
  out += "kind ";
  out += to_string(kind_);
  out += "\ndim " + std::to_string(dim());
  out += "\nwidth " + std::to_string(width());
  out += "\n";
  for (int h = 0; h < width(); ++h) {
    for (int c = 0; c < dim(); ++c) {
      out += hexfloat(omegas_(h, c));
      out += c + 1 < dim() ? ' ' : '\n';
    }
  }
  return out;
}

std::uint64_t FeatureEnsemble::fingerprint() const {
  Fnv1a h;
  h.update(serialize());
  return h.digest();
}

FeatureEnsemble sample_ensemble(const OmegaSampler& sampler, FeatureKind kind,
                                int width) {
  if (width < 1) {
    throw InvalidArgumentError("sample_ensemble: width must be >= 1");
  }
  if (sampler.dim < 1) {
    throw InvalidArgumentError("sample_ensemble: sampler dim must be >= 1");
  }
  Matrix omegas(width, sampler.dim);
  for (int h = 0; h < width; ++h) {
    for (int c = 0; c < sampler.dim; ++c) {
      omegas(h, c) = sampler.draw(h, c);
    }
  }
  return FeatureEnsemble(std::move(omegas), kind);
}

double eval_feature(FeatureKind kind, const Vector& omega, const Vector& x) {
  if (omega.size() != x.size()) {
    throw DimensionError("eval_feature: omega has length " +
                         std::to_string(omega.size()) + ", x has length " +
                         std::to_string(x.size()));
  }
  const double z = omega.dot(x);
  switch (kind) {
    case FeatureKind::ReluDot: return z > 0.0 ? z : 0.0;
    case FeatureKind::TanhDot: return std::tanh(z);
  }
  throw InvalidArgumentError("unknown feature kind");
}

double eval_feature_deriv(FeatureKind kind, double preactivation) {
  switch (kind) {
    case FeatureKind::ReluDot: return preactivation > 0.0 ? 1.0 : 0.0;
    case FeatureKind::TanhDot: {
      const double t = std::tanh(preactivation);
      return 1.0 - t * t;
    }
  }
  throw InvalidArgumentError("unknown feature kind");
}

Vector feature_row(const FeatureEnsemble& ensemble, const Vector& x) {
  if (x.size() != ensemble.dim()) {
    throw DimensionError("feature_row: x has length " + std::to_string(x.size()) +
                         ", ensemble dim is " + std::to_string(ensemble.dim()));
  }
  // Routes through eval_feature so bulk and scalar evaluation agree bit for bit.
  Vector row(ensemble.width());
  Vector omega(ensemble.dim());
  for (int h = 0; h < ensemble.width(); ++h) {
    omega = ensemble.omegas().row(h).transpose();
    row[h] = eval_feature(ensemble.feature_kind(), omega, x);
  }
  return row;
}

Matrix feature_matrix(const FeatureEnsemble& ensemble, const Dataset& dataset) {
  if (dataset.input_dim() != ensemble.dim()) {
    throw DimensionError("feature_matrix: dataset inputs have length " +
                         std::to_string(dataset.input_dim()) +
                         ", ensemble dim is " + std::to_string(ensemble.dim()));
  }
  Matrix out(static_cast<Eigen::Index>(dataset.size()), ensemble.width());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = feature_row(ensemble, dataset[i].x).transpose();
  }
  return out;
}

}  // namespace ntkm
