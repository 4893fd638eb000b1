#include "ntkm/trainers.hpp"

#include <cmath>
#include <utility>

namespace ntkm {

const char* to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::AdamStar: return "adamstar";
  }
  return "?";
}

namespace {

std::string vector_key(const Vector& x) {
  return std::string(reinterpret_cast<const char*>(x.data()),
                     static_cast<std::size_t>(x.size()) * sizeof(double));
}

void require_finite(const Vector& v, const char* what, long step) {
  if (!v.allFinite()) throw DivergenceError(std::string("non-finite ") + what, step);
}

void require_finite(const Matrix& m, const char* what, long step) {
  if (!m.allFinite()) throw DivergenceError(std::string("non-finite ") + what, step);
}

}  // namespace

// ---------------------------------------------------------------------------
// KernelMachine
// ---------------------------------------------------------------------------

KernelMachine::KernelMachine(KernelSpec spec, TrainConfig config, TrainerMode mode,
                             int output_dim)
    : spec_(std::move(spec)),
      config_(std::move(config)),
      mode_(mode),
      output_dim_(output_dim) {
  config_.validate();
  if (output_dim_ < 1) {
    throw InvalidArgumentError("KernelMachine: output_dim must be >= 1");
  }
  vhat_ = Vector::Zero(output_dim_);
}

int KernelMachine::intern_train_x(const Vector& x) {
  if (x.size() != spec_.dim()) {
    throw DimensionError("KernelMachine: input has length " + std::to_string(x.size()) +
                         ", kernel dim is " + std::to_string(spec_.dim()));
  }
  const std::string key = vector_key(x);
  if (auto it = x_index_.find(key); it != x_index_.end()) return it->second;

  const int idx = static_cast<int>(unique_xs_.size());
  unique_xs_.push_back(x);
  if (spec_.is_empirical()) {
    phi_.push_back(feature_row(spec_.ensemble(), x));
  }
  // Fill this input's row of the lower triangle once; every later use is a lookup.
  std::vector<double> row(static_cast<std::size_t>(idx) + 1);
  for (int j = 0; j <= idx; ++j) {
    if (spec_.is_empirical()) {
      double sum = 0.0;
      const Vector& a = phi_[static_cast<std::size_t>(idx)];
      const Vector& b = phi_[static_cast<std::size_t>(j)];
      for (Eigen::Index h = 0; h < a.size(); ++h) sum += a[h] * b[h];
      row[static_cast<std::size_t>(j)] = sum / static_cast<double>(a.size());
    } else {
      row[static_cast<std::size_t>(j)] = kernel_eval(spec_, x, unique_xs_[static_cast<std::size_t>(j)]);
    }
  }
  kern_.push_back(std::move(row));
  x_index_.emplace(key, idx);
  return idx;
}

double KernelMachine::kernel_entry(int i, int j) const {
  return i >= j ? kern_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                : kern_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
}

void KernelMachine::step(const Example& example, const LossSpec& loss) {
  if (example.y.size() != output_dim_) {
    throw DimensionError("KernelMachine: target has length " +
                         std::to_string(example.y.size()) + ", machine output_dim is " +
                         std::to_string(output_dim_));
  }
  const long t = step_count() + 1;
  const int xt = intern_train_x(example.x);

  // (a) predict with the state after t-1 steps
  Vector f = Vector::Zero(output_dim_);
  for (long i = 0; i < t - 1; ++i) {
    const double k = kernel_entry(xt, step_x_[static_cast<std::size_t>(i)]);
    f.noalias() -= config_.alpha * k *
                   (gamma_[static_cast<std::size_t>(i)].cwiseProduct(coeff_[static_cast<std::size_t>(i)]));
  }
  require_finite(f, "prediction", t);

  // (b) this step's loss gradient
  Vector gamma = loss_grad(loss, f, example.y);
  require_finite(gamma, "gradient", t);

  step_x_.push_back(xt);
  const double k_tt = kernel_entry(xt, xt);

  if (mode_ == TrainerMode::Sgd) {
    gamma_.push_back(std::move(gamma));
    coeff_.push_back(Vector::Ones(output_dim_));
    vhat_hist_.push_back(vhat_);
    return;
  }

  // (c) AdamStar: advance vhat, then fold d_t into every coefficient
  vhat_ = config_.beta2 * vhat_ +
          (1.0 - config_.beta2) * k_tt * gamma.cwiseProduct(gamma);
  vhat_hist_.push_back(vhat_);

  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));
  const Vector d_t =
      ((vhat_ / bias2).cwiseSqrt().array() + config_.epsilon).cwiseInverse();

  gamma_.push_back(std::move(gamma));
  coeff_.push_back(Vector::Zero(output_dim_));

  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
  double weight = (1.0 - config_.beta1) / bias1;  // beta1^(t-i) * (1-beta1)/(1-beta1^t)
  for (long i = t; i >= 1; --i) {
    coeff_[static_cast<std::size_t>(i - 1)].noalias() += weight * d_t;
    weight *= config_.beta1;
    if (weight == 0.0) break;
  }
}

Vector KernelMachine::predict(const Vector& x) const {
  if (x.size() != spec_.dim()) {
    throw DimensionError("KernelMachine::predict: input has length " +
                         std::to_string(x.size()) + ", kernel dim is " +
                         std::to_string(spec_.dim()));
  }
  const long t = step_count();
  if (t == 0) return Vector::Zero(output_dim_);

  // Training inputs hit the interned cache; new inputs get a cached column
  // against the unique training inputs, extended if training continued since.
  const std::string key = vector_key(x);
  if (auto it = x_index_.find(key); it != x_index_.end()) {
    const int xi = it->second;
    Vector f = Vector::Zero(output_dim_);
    for (long i = 0; i < t; ++i) {
      const double k = kernel_entry(xi, step_x_[static_cast<std::size_t>(i)]);
      f.noalias() -= config_.alpha * k *
                     (gamma_[static_cast<std::size_t>(i)].cwiseProduct(coeff_[static_cast<std::size_t>(i)]));
    }
    return f;
  }

  std::vector<double>* eval_col = &eval_cache_[key];
  while (eval_col->size() < unique_xs_.size()) {
    const std::size_t j = eval_col->size();
    if (spec_.is_empirical()) {
      const Vector phi_x = feature_row(spec_.ensemble(), x);
      // Fill all missing entries with one feature evaluation of x.
      for (std::size_t jj = j; jj < unique_xs_.size(); ++jj) {
        double sum = 0.0;
        const Vector& b = phi_[jj];
        for (Eigen::Index h = 0; h < phi_x.size(); ++h) sum += phi_x[h] * b[h];
        eval_col->push_back(sum / static_cast<double>(phi_x.size()));
      }
    } else {
      eval_col->push_back(kernel_eval(spec_, x, unique_xs_[j]));
    }
  }
  const double* column = eval_col->data();

  Vector f = Vector::Zero(output_dim_);
  for (long i = 0; i < t; ++i) {
    const double k = column[step_x_[static_cast<std::size_t>(i)]];
    f.noalias() -= config_.alpha * k *
                   (gamma_[static_cast<std::size_t>(i)].cwiseProduct(coeff_[static_cast<std::size_t>(i)]));
  }
  return f;
}

void KernelMachine::set_all_coefficients(const Vector& value) {
  if (value.size() != output_dim_) {
    throw DimensionError("set_all_coefficients: value has wrong length");
  }
  for (Vector& c : coeff_) c = value;
}

// ---------------------------------------------------------------------------
// FiniteModel
// ---------------------------------------------------------------------------

FiniteModel::FiniteModel(std::shared_ptr<const FeatureEnsemble> ensemble, int output_dim)
    : ensemble_(std::move(ensemble)) {
  if (!ensemble_) throw InvalidArgumentError("FiniteModel: null ensemble");
  if (output_dim < 1) throw InvalidArgumentError("FiniteModel: output_dim must be >= 1");
  weights_ = Matrix::Zero(ensemble_->width(), output_dim);
}

Vector FiniteModel::predict(const Vector& x) const {
  return predict_from_features(feature_row(*ensemble_, x));
}

Vector FiniteModel::predict_from_features(const Vector& phi) const {
  if (phi.size() != weights_.rows()) {
    throw DimensionError("FiniteModel: feature row has wrong length");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(ensemble_->width()));
  return scale * (weights_.transpose() * phi);
}

void FiniteModel::apply_update(const Matrix& update) {
  if (update.rows() != weights_.rows() || update.cols() != weights_.cols()) {
    throw DimensionError("FiniteModel: update has wrong shape");
  }
  weights_ += update;
}

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

OptimizerState::OptimizerState(OptimizerKind kind, int rows, int cols)
    : kind_(kind), rows_(rows) {
  if (rows < 1 || cols < 1) {
    throw InvalidArgumentError("OptimizerState: rows and cols must be >= 1");
  }
  m_ = Matrix::Zero(rows, cols);
  if (kind == OptimizerKind::Adam) v_full_ = Matrix::Zero(rows, cols);
  if (kind == OptimizerKind::AdamStar) v_mean_ = Vector::Zero(cols);
}

const Matrix& OptimizerState::second_moment_matrix() const {
  if (kind_ != OptimizerKind::Adam) {
    throw InvalidArgumentError("second_moment_matrix: not an Adam state");
  }
  return v_full_;
}

const Vector& OptimizerState::second_moment_mean() const {
  if (kind_ != OptimizerKind::AdamStar) {
    throw InvalidArgumentError("second_moment_mean: not an AdamStar state");
  }
  return v_mean_;
}

namespace {

void require_shape(const OptimizerState& state, const Matrix& grad, OptimizerKind kind) {
  if (state.kind() != kind) {
    throw InvalidArgumentError("optimizer state kind mismatch");
  }
  if (grad.rows() != state.first_moment().rows() ||
      grad.cols() != state.first_moment().cols()) {
    throw DimensionError("optimizer update: gradient shape mismatch");
  }
}

}  // namespace

Matrix sgd_update(OptimizerState& state, const Matrix& grad, double alpha) {
  require_shape(state, grad, OptimizerKind::Sgd);
  ++state.step_;
  return -alpha * grad;
}

Matrix adam_update(OptimizerState& state, const Matrix& grad, const TrainConfig& config) {
  require_shape(state, grad, OptimizerKind::Adam);
  const long t = ++state.step_;
  state.m_ = config.beta1 * state.m_ + (1.0 - config.beta1) * grad;
  state.v_full_ = config.beta2 * state.v_full_ +
                  (1.0 - config.beta2) * grad.cwiseProduct(grad);
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  Matrix update = -config.alpha / bias1 * state.m_;
  update.array() /= (state.v_full_ / bias2).cwiseSqrt().array() + config.epsilon;
  return update;
}

Matrix adamstar_update(OptimizerState& state, const Matrix& grad, const TrainConfig& config) {
  require_shape(state, grad, OptimizerKind::AdamStar);
  const long t = ++state.step_;
  const double h = static_cast<double>(state.rows_);
  state.m_ = config.beta1 * state.m_ + (1.0 - config.beta1) * grad;
  const Vector mean_sq = grad.cwiseProduct(grad).colwise().mean().transpose();
  state.v_mean_ = config.beta2 * state.v_mean_ + (1.0 - config.beta2) * mean_sq;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  // E-vector denominator, broadcast across the H axis.
  const Vector denom =
      ((h * state.v_mean_ / bias2).cwiseSqrt().array() + config.epsilon).matrix();
  Matrix update = -config.alpha / bias1 * state.m_;
  update.array().rowwise() /= denom.transpose().array();
  return update;
}

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

FiniteModel train_finite_frozen(std::shared_ptr<const FeatureEnsemble> ensemble,
                                const Dataset& dataset, const LossSpec& loss,
                                OptimizerKind optimizer, const TrainConfig& config,
                                const FrozenStepObserver& observer) {
  config.validate();
  FiniteModel model(std::move(ensemble), dataset.output_dim());
  const int width = model.ensemble().width();
  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(width));

  // Feature rows per dataset example, computed once.
  const Matrix features = feature_matrix(model.ensemble(), dataset);
  OptimizerState state(optimizer, width, dataset.output_dim());

  Vector phi(width);
  for (long t = 1; t <= config.steps; ++t) {
    const auto e = static_cast<Eigen::Index>((t - 1) % static_cast<long>(dataset.size()));
    phi = features.row(e).transpose();

    const Vector f = model.predict_from_features(phi);
    const Vector gamma = loss_grad(loss, f, dataset[static_cast<std::size_t>(e)].y);
    require_finite(gamma, "gradient", t);

    const Matrix grad = inv_sqrt_h * (phi * gamma.transpose());  // H x E
    Matrix update;
    switch (optimizer) {
      case OptimizerKind::Sgd: update = sgd_update(state, grad, config.alpha); break;
      case OptimizerKind::Adam: update = adam_update(state, grad, config); break;
      case OptimizerKind::AdamStar: update = adamstar_update(state, grad, config); break;
    }
    model.apply_update(update);
    require_finite(model.weights(), "weights", t);

    if (observer) observer(FrozenStepInfo{t, model, state, gamma});
  }
  return model;
}

MlpModel::MlpModel(Matrix first_layer, FeatureKind kind, int output_dim)
    : first_(std::move(first_layer)), kind_(kind) {
  if (first_.rows() < 1 || first_.cols() < 1) {
    throw InvalidArgumentError("MlpModel: empty first layer");
  }
  if (output_dim < 1) throw InvalidArgumentError("MlpModel: output_dim must be >= 1");
  second_ = Matrix::Zero(first_.rows(), output_dim);
}

Vector MlpModel::predict(const Vector& x) const {
  // Same evaluation path as the frozen model so the two agree bit for bit
  // when the first layer never moves.
  const FeatureEnsemble view(first_, kind_);
  const Vector phi = feature_row(view, x);
  const double scale = 1.0 / std::sqrt(static_cast<double>(first_.rows()));
  return scale * (second_.transpose() * phi);
}

void MlpModel::apply_updates(const Matrix& first_update, const Matrix& second_update) {
  if (first_update.rows() != first_.rows() || first_update.cols() != first_.cols() ||
      second_update.rows() != second_.rows() || second_update.cols() != second_.cols()) {
    throw DimensionError("MlpModel: update shape mismatch");
  }
  first_ += first_update;
  second_ += second_update;
}

MlpModel train_finite_mlp_full(int hidden_width, const OmegaSampler& sampler,
                               FeatureKind kind, const Dataset& dataset,
                               const LossSpec& loss, OptimizerKind optimizer,
                               const TrainConfig& config,
                               const MlpTrainOptions& options,
                               const MlpStepObserver& observer) {
  config.validate();
  if (sampler.dim != dataset.input_dim()) {
    throw DimensionError("train_finite_mlp_full: sampler dim does not match dataset");
  }
  const FeatureEnsemble init = sample_ensemble(sampler, kind, hidden_width);
  MlpModel model(init.omegas(), kind, dataset.output_dim());

  const int width = hidden_width;
  const int in_dim = dataset.input_dim();
  const int out_dim = dataset.output_dim();
  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(width));

  OptimizerState first_state(optimizer, width, in_dim);
  OptimizerState second_state(optimizer, width, out_dim);

  TrainConfig first_config = config;
  if (options.first_layer_alpha.has_value()) {
    first_config.alpha = *options.first_layer_alpha;
  }

  Vector z(width), act(width), deriv(width);
  for (long t = 1; t <= config.steps; ++t) {
    const Example& ex = dataset.example_for_step(t);

    // Forward pass through the shared feature evaluation.
    Vector omega(in_dim);
    for (int h = 0; h < width; ++h) {
      omega = model.first_layer().row(h).transpose();
      z[h] = omega.dot(ex.x);
      act[h] = eval_feature(kind, omega, ex.x);
      deriv[h] = eval_feature_deriv(kind, z[h]);
    }
    const Vector f = inv_sqrt_h * (model.second_layer().transpose() * act);
    const Vector gamma = loss_grad(loss, f, ex.y);
    require_finite(gamma, "gradient", t);

    // Backward pass.
    const Matrix second_grad = inv_sqrt_h * (act * gamma.transpose());     // H x E
    const Vector dact = inv_sqrt_h * (model.second_layer() * gamma);       // H
    const Matrix first_grad = (dact.cwiseProduct(deriv)) * ex.x.transpose();  // H x D

    Matrix first_update, second_update;
    switch (optimizer) {
      case OptimizerKind::Sgd:
        first_update = sgd_update(first_state, first_grad, first_config.alpha);
        second_update = sgd_update(second_state, second_grad, config.alpha);
        break;
      case OptimizerKind::Adam:
        first_update = adam_update(first_state, first_grad, first_config);
        second_update = adam_update(second_state, second_grad, config);
        break;
      case OptimizerKind::AdamStar:
        first_update = adamstar_update(first_state, first_grad, first_config);
        second_update = adamstar_update(second_state, second_grad, config);
        break;
    }
    model.apply_updates(first_update, second_update);
    require_finite(model.first_layer(), "first-layer weights", t);
    require_finite(model.second_layer(), "second-layer weights", t);

    if (observer) observer(MlpStepInfo{t, model, gamma});
  }
  return model;
}

}  // namespace ntkm
