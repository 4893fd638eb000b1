#include "ntkm/transport.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "ntkm/numerics.hpp"

namespace ntkm {

double DensitySpec::density(const Vector& omega) const {
  const double s2 = sigma * sigma;
  const double q = (omega - mean).squaredNorm() / (2.0 * s2);
  const double norm = std::pow(2.0 * std::numbers::pi * s2, -0.5 * dim());
  return norm * std::exp(-q);
}

Vector DensitySpec::score(const Vector& omega) const {
  return -(omega - mean) / (sigma * sigma);
}

void DensitySpec::validate() const {
  if (mean.size() < 1) throw InvalidArgumentError("density mean is empty");
  if (!(sigma > 0.0)) throw InvalidArgumentError("density sigma must be > 0");
}

VectorFieldSpec VectorFieldSpec::constant(Vector b) {
  if (b.size() < 1) throw InvalidArgumentError("constant field: empty b");
  return VectorFieldSpec(Kind::Constant, Matrix(), std::move(b), 0.0);
}

VectorFieldSpec VectorFieldSpec::linear(Matrix a, Vector b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw DimensionError("linear field: A must be S x S and match b");
  }
  const double div = a.trace();
  return VectorFieldSpec(Kind::Linear, std::move(a), std::move(b), div);
}

Vector VectorFieldSpec::value(const Vector& omega) const {
  if (omega.size() != dim()) throw DimensionError("field: omega has wrong length");
  switch (kind_) {
    case Kind::Constant: return b_;
    case Kind::Linear: return a_ * omega + b_;
  }
  throw InvalidArgumentError("unknown field kind");
}

HeadMapSpec HeadMapSpec::constant(Vector c) {
  if (c.size() < 1) throw InvalidArgumentError("constant head: empty c");
  return HeadMapSpec(Kind::Constant, Matrix(), std::move(c));
}

HeadMapSpec HeadMapSpec::tanh_linear(Matrix w) {
  if (w.rows() < 1 || w.cols() < 1) throw InvalidArgumentError("tanh_linear head: empty W");
  return HeadMapSpec(Kind::TanhLinear, std::move(w), Vector());
}

int HeadMapSpec::output_dim() const noexcept {
  return kind_ == Kind::Constant ? static_cast<int>(c_.size())
                                 : static_cast<int>(w_.rows());
}

Vector HeadMapSpec::eval(const Vector& omega) const {
  switch (kind_) {
    case Kind::Constant: return c_;
    case Kind::TanhLinear: {
      if (omega.size() != w_.cols()) throw DimensionError("head: omega has wrong length");
      return (w_ * omega).array().tanh().matrix();
    }
  }
  throw InvalidArgumentError("unknown head kind");
}

TransportHeadFn head_fn(const HeadMapSpec& head) {
  return [head](const Vector& omega) { return head.eval(omega); };
}

TransportHeadFn reweight_head(const HeadMapSpec& head, const DensitySpec& rho,
                              const VectorFieldSpec& field, double alpha) {
  return [head, rho, field, alpha](const Vector& omega) {
    const double factor =
        1.0 - alpha * (field.divergence() + field.value(omega).dot(rho.score(omega)));
    return (head.eval(omega) * factor).eval();
  };
}

void QuadratureGrid::validate() const {
  if (dim != 1 && dim != 2) {
    throw InvalidArgumentError("quadrature grid supports dim 1 or 2, got " +
                               std::to_string(dim));
  }
  if (points_per_axis < 1) throw InvalidArgumentError("points_per_axis must be >= 1");
  if (!(half_width > 0.0)) throw InvalidArgumentError("half_width must be > 0");
}

namespace {

// Midpoint tensor grid over [mean - w, mean + w]^S with vector-valued
// integrands. Rows are pairwise-summed, then the row totals are
// pairwise-summed again, keeping the accumulated roundoff near log(n) ulps.
Vector integrate_grid(const DensitySpec& rho, const QuadratureGrid& grid, int out_dim,
                      const std::function<Vector(const Vector&)>& integrand) {
  grid.validate();
  rho.validate();
  if (rho.dim() != grid.dim) {
    throw DimensionError("quadrature grid dim does not match density dim");
  }
  const int ppa = grid.points_per_axis;
  const double extent = grid.half_width * rho.sigma;
  const double h = 2.0 * extent / static_cast<double>(ppa);

  auto axis_point = [&](int axis, int k) {
    return rho.mean[axis] - extent + (static_cast<double>(k) + 0.5) * h;
  };

  if (grid.dim == 1) {
    std::vector<std::vector<double>> cells(
        static_cast<std::size_t>(out_dim),
        std::vector<double>(static_cast<std::size_t>(ppa)));
    Vector omega(1);
    for (int k = 0; k < ppa; ++k) {
      omega[0] = axis_point(0, k);
      const Vector v = integrand(omega);
      for (int e = 0; e < out_dim; ++e) {
        cells[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)] = v[e];
      }
    }
    Vector out(out_dim);
    for (int e = 0; e < out_dim; ++e) {
      out[e] = pairwise_sum(cells[static_cast<std::size_t>(e)]) * h;
    }
    return out;
  }

  // dim == 2
  std::vector<std::vector<double>> row_totals(
      static_cast<std::size_t>(out_dim),
      std::vector<double>(static_cast<std::size_t>(ppa)));
  std::vector<std::vector<double>> row(
      static_cast<std::size_t>(out_dim),
      std::vector<double>(static_cast<std::size_t>(ppa)));
  Vector omega(2);
  for (int k0 = 0; k0 < ppa; ++k0) {
    omega[0] = axis_point(0, k0);
    for (int k1 = 0; k1 < ppa; ++k1) {
      omega[1] = axis_point(1, k1);
      const Vector v = integrand(omega);
      for (int e = 0; e < out_dim; ++e) {
        row[static_cast<std::size_t>(e)][static_cast<std::size_t>(k1)] = v[e];
      }
    }
    for (int e = 0; e < out_dim; ++e) {
      row_totals[static_cast<std::size_t>(e)][static_cast<std::size_t>(k0)] =
          pairwise_sum(row[static_cast<std::size_t>(e)]);
    }
  }
  Vector out(out_dim);
  for (int e = 0; e < out_dim; ++e) {
    out[e] = pairwise_sum(row_totals[static_cast<std::size_t>(e)]) * h * h;
  }
  return out;
}

void require_tanh(FeatureKind g) {
  if (g != FeatureKind::TanhDot) {
    throw InvalidArgumentError(
        "transport integrals require TanhDot features (differentiable in omega)");
  }
}

}  // namespace

Vector model_integral(const DensitySpec& rho, FeatureKind g,
                      const TransportHeadFn& head, int head_dim, const Vector& x,
                      const QuadratureGrid& grid) {
  require_tanh(g);
  if (x.size() != rho.dim()) throw DimensionError("model_integral: x has wrong length");
  return integrate_grid(rho, grid, head_dim, [&](const Vector& omega) {
    return (rho.density(omega) * eval_feature(g, omega, x) * head(omega)).eval();
  });
}

Vector pushforward_integral(const DensitySpec& rho, FeatureKind g,
                            const TransportHeadFn& head, int head_dim,
                            const VectorFieldSpec& field, double alpha,
                            const Vector& x, const QuadratureGrid& grid) {
  require_tanh(g);
  if (x.size() != rho.dim()) throw DimensionError("pushforward_integral: x has wrong length");
  if (field.dim() != rho.dim()) throw DimensionError("pushforward_integral: field dim mismatch");
  return integrate_grid(rho, grid, head_dim, [&](const Vector& omega) {
    const Vector moved = omega + alpha * field.value(omega);
    return (rho.density(omega) * eval_feature(g, moved, x) * head(moved)).eval();
  });
}

double equivalence_error(const DensitySpec& rho, FeatureKind g,
                         const HeadMapSpec& head, const VectorFieldSpec& field,
                         const Vector& x, double alpha, const QuadratureGrid& grid) {
  const int e = head.output_dim();
  const Vector moved = pushforward_integral(rho, g, head_fn(head), e, field, alpha, x, grid);
  const Vector reweighted =
      model_integral(rho, g, reweight_head(head, rho, field, alpha), e, x, grid);
  return (moved - reweighted).cwiseAbs().maxCoeff();
}

double mass_after_update(const DensitySpec& rho, const VectorFieldSpec& field,
                         double alpha, const QuadratureGrid& grid) {
  const Vector mass = integrate_grid(rho, grid, 1, [&](const Vector& omega) {
    Vector v(1);
    v[0] = rho.density(omega) *
           (1.0 - alpha * (field.divergence() + field.value(omega).dot(rho.score(omega))));
    return v;
  });
  return mass[0];
}

std::vector<TransportInstance> canonical_transport_instances() {
  std::vector<TransportInstance> out;

  // S = 1: mean-shifted Gaussian, E = 2 heads.
  {
    DensitySpec rho;
    rho.mean = Vector::Constant(1, 0.4);
    rho.sigma = 1.1;
    Vector x(1);
    x << 0.8;
    QuadratureGrid grid{1, 8.0, 2001};

    const VectorFieldSpec constant_field = VectorFieldSpec::constant((Vector(1) << 0.7).finished());
    Matrix a(1, 1);
    a << -0.5;
    const VectorFieldSpec linear_field =
        VectorFieldSpec::linear(a, (Vector(1) << 0.35).finished());

    const HeadMapSpec constant_head =
        HeadMapSpec::constant((Vector(2) << 1.3, -0.7).finished());
    Matrix w(2, 1);
    w << 0.9, -0.6;
    const HeadMapSpec tanh_head = HeadMapSpec::tanh_linear(w);

    out.push_back({"s1_constant_field_constant_head", rho, constant_field, constant_head, x, grid});
    out.push_back({"s1_constant_field_tanh_head", rho, constant_field, tanh_head, x, grid});
    out.push_back({"s1_linear_field_constant_head", rho, linear_field, constant_head, x, grid});
    out.push_back({"s1_linear_field_tanh_head", rho, linear_field, tanh_head, x, grid});
  }

  // S = 2.
  {
    DensitySpec rho;
    rho.mean = (Vector(2) << 0.4, -0.3).finished();
    rho.sigma = 1.2;
    Vector x(2);
    x << 0.8, -0.5;
    QuadratureGrid grid{2, 8.0, 1001};

    const VectorFieldSpec constant_field =
        VectorFieldSpec::constant((Vector(2) << 0.7, -0.2).finished());
    Matrix a(2, 2);
    a << -0.5, 0.2, 0.1, -0.4;
    const VectorFieldSpec linear_field =
        VectorFieldSpec::linear(a, (Vector(2) << 0.35, 0.15).finished());

    const HeadMapSpec constant_head =
        HeadMapSpec::constant((Vector(2) << 1.3, -0.7).finished());
    Matrix w(2, 2);
    w << 0.9, -0.4, -0.6, 0.3;
    const HeadMapSpec tanh_head = HeadMapSpec::tanh_linear(w);

    out.push_back({"s2_constant_field_constant_head", rho, constant_field, constant_head, x, grid});
    out.push_back({"s2_constant_field_tanh_head", rho, constant_field, tanh_head, x, grid});
    out.push_back({"s2_linear_field_constant_head", rho, linear_field, constant_head, x, grid});
    out.push_back({"s2_linear_field_tanh_head", rho, linear_field, tanh_head, x, grid});
  }

  return out;
}

TransportSweepResult transport_sweep(double alpha_max, int levels) {
  if (!(alpha_max > 0.0)) throw InvalidArgumentError("alpha_max must be > 0");
  if (levels < 2) throw InvalidArgumentError("transport sweep needs >= 2 levels");

  TransportSweepResult result;
  for (const TransportInstance& inst : canonical_transport_instances()) {
    TransportSweepInstanceResult r;
    r.name = inst.name;
    double alpha = alpha_max;
    for (int level = 0; level < levels; ++level) {
      r.alphas.push_back(alpha);
      r.errors.push_back(equivalence_error(inst.rho, FeatureKind::TanhDot, inst.head,
                                           inst.field, inst.x, alpha, inst.grid));
      alpha *= 0.5;
    }
    // Least-squares slope of log error vs log alpha.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(levels);
    for (int i = 0; i < levels; ++i) {
      const double lx = std::log(r.alphas[static_cast<std::size_t>(i)]);
      const double ly = std::log(r.errors[static_cast<std::size_t>(i)]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    r.mass_error = std::abs(mass_after_update(inst.rho, inst.field, alpha_max, inst.grid) - 1.0);
    result.instances.push_back(std::move(r));
  }
  return result;
}

}  // namespace ntkm
