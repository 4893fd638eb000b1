#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ntkm/kernel.hpp"
#include "ntkm/types.hpp"

namespace ntkm {

enum class TrainerMode { Sgd, AdamStar };
enum class OptimizerKind { Sgd, Adam, AdamStar };

const char* to_string(OptimizerKind kind);

// Dual representation of a trained frozen-feature model: one gradient vector
// gamma_i and one coefficient vector c_i per completed step, with predictions
//   f(x) = -alpha * sum_i K(x, x_i) * gamma_i (.) c_i.
// Sgd mode keeps every c_i at 1. AdamStar mode maintains the second-moment
// recursion vhat_t and folds each new step's contribution into all previous
// coefficients, so training touches O(t) state per step.
//
// Kernel entries between inputs seen so far are computed once and cached;
// a training run never recomputes them.
class KernelMachine {
 public:
  KernelMachine(KernelSpec spec, TrainConfig config, TrainerMode mode,
                int output_dim);

  // Processes the t-th training example (machine must have seen t-1 steps).
  void step(const Example& example, const LossSpec& loss);

  // -alpha * sum_{i<=t} K(x, x_i) gamma_i (.) c_i; zero vector before any step.
  Vector predict(const Vector& x) const;

  long step_count() const noexcept { return static_cast<long>(gamma_.size()); }
  int output_dim() const noexcept { return output_dim_; }
  TrainerMode mode() const noexcept { return mode_; }
  const TrainConfig& config() const noexcept { return config_; }
  const KernelSpec& spec() const noexcept { return spec_; }

  const std::vector<Vector>& gradients() const noexcept { return gamma_; }
  const std::vector<Vector>& coeffs() const noexcept { return coeff_; }
  const Vector& vhat() const noexcept { return vhat_; }
  // vhat after each completed step; lets the coefficient summation be
  // recomputed directly and checked against the incremental values.
  const std::vector<Vector>& vhat_history() const noexcept { return vhat_hist_; }

  // Replaces every stored c_i. Exercised by the structural reduction tests
  // (an AdamStar machine with all-ones coefficients must walk the Sgd path).
  void set_all_coefficients(const Vector& value);

 private:
  int intern_train_x(const Vector& x);
  double kernel_entry(int i, int j) const;  // over interned training inputs

  KernelSpec spec_;
  TrainConfig config_;
  TrainerMode mode_;
  int output_dim_;

  std::vector<Vector> unique_xs_;
  std::vector<Vector> phi_;                    // feature rows, empirical kernels only
  std::vector<std::vector<double>> kern_;      // lower triangle over unique_xs_
  std::unordered_map<std::string, int> x_index_;
  std::vector<int> step_x_;                    // per-step index into unique_xs_

  std::vector<Vector> gamma_;
  std::vector<Vector> coeff_;
  Vector vhat_;
  std::vector<Vector> vhat_hist_;

  // Kernel columns K(x_eval, unique_xs_) for inputs seen only via predict();
  // grown lazily as training interns more unique inputs.
  mutable std::unordered_map<std::string, std::vector<double>> eval_cache_;
};

// Explicit frozen-feature model: f(x) = (1/sqrt(H)) * phi(x)^T M over a fixed
// ensemble. M is zero-initialized; the ensemble is shared and never mutated.
class FiniteModel {
 public:
  FiniteModel(std::shared_ptr<const FeatureEnsemble> ensemble, int output_dim);

  Vector predict(const Vector& x) const;
  Vector predict_from_features(const Vector& phi) const;

  const FeatureEnsemble& ensemble() const noexcept { return *ensemble_; }
  const std::shared_ptr<const FeatureEnsemble>& ensemble_ptr() const noexcept {
    return ensemble_;
  }
  const Matrix& weights() const noexcept { return weights_; }  // H x E
  int output_dim() const noexcept { return static_cast<int>(weights_.cols()); }

  void apply_update(const Matrix& update);

 private:
  std::shared_ptr<const FeatureEnsemble> ensemble_;
  Matrix weights_;
};

// Moment state for the matrix optimizers. m is always H x E. Adam keeps a
// full H x E second moment; AdamStar keeps the E-vector mean over the H axis.
class OptimizerState {
 public:
  OptimizerState(OptimizerKind kind, int rows, int cols);

  OptimizerKind kind() const noexcept { return kind_; }
  long step() const noexcept { return step_; }
  const Matrix& first_moment() const noexcept { return m_; }
  const Matrix& second_moment_matrix() const;
  const Vector& second_moment_mean() const;

  friend Matrix sgd_update(OptimizerState& state, const Matrix& grad, double alpha);
  friend Matrix adam_update(OptimizerState& state, const Matrix& grad,
                            const TrainConfig& config);
  friend Matrix adamstar_update(OptimizerState& state, const Matrix& grad,
                                const TrainConfig& config);

 private:
  OptimizerKind kind_;
  long step_ = 0;
  int rows_;
  Matrix m_;       // H x E
  Matrix v_full_;  // H x E (Adam)
  Vector v_mean_;  // E (AdamStar)
};

// -alpha * grad. State only advances its step counter.
Matrix sgd_update(OptimizerState& state, const Matrix& grad, double alpha);

// Bias-corrected ADAM update with the epsilon guard outside the square root.
Matrix adam_update(OptimizerState& state, const Matrix& grad, const TrainConfig& config);

// ADAM with the second moment averaged over the H axis. The denominator is
// sqrt(H * v_t / (1 - beta2^t)) + epsilon, broadcast across rows: the
// H-scaled placement is what the dual (kernel) form factors through exactly,
// and it keeps the update's effect on f(x) width-independent.
Matrix adamstar_update(OptimizerState& state, const Matrix& grad, const TrainConfig& config);

// Per-step view handed to training observers after the step's update.
struct FrozenStepInfo {
  long step = 0;
  const FiniteModel& model;
  const OptimizerState& state;
  const Vector& gamma;
};

using FrozenStepObserver = std::function<void(const FrozenStepInfo&)>;

// Online loop over the dataset (step t uses example (t-1) mod N) applying the
// chosen optimizer to the last-layer matrix of a frozen-feature model.
FiniteModel train_finite_frozen(std::shared_ptr<const FeatureEnsemble> ensemble,
                                const Dataset& dataset, const LossSpec& loss,
                                OptimizerKind optimizer, const TrainConfig& config,
                                const FrozenStepObserver& observer = {});

// Two-layer model with a trainable first layer; the benchmark baseline with
// feature learning left on.
class MlpModel {
 public:
  MlpModel(Matrix first_layer, FeatureKind kind, int output_dim);

  Vector predict(const Vector& x) const;
  const Matrix& first_layer() const noexcept { return first_; }    // H x D
  const Matrix& second_layer() const noexcept { return second_; }  // H x E
  FeatureKind feature_kind() const noexcept { return kind_; }
  int hidden_width() const noexcept { return static_cast<int>(first_.rows()); }

  void apply_updates(const Matrix& first_update, const Matrix& second_update);

 private:
  Matrix first_;   // H x D
  Matrix second_;  // H x E, zero-initialized
  FeatureKind kind_;
};

struct MlpTrainOptions {
  // Step size for the first layer; config.alpha when unset. Zero reduces the
  // model to the frozen trainer exactly.
  std::optional<double> first_layer_alpha;
};

struct MlpStepInfo {
  long step = 0;
  const MlpModel& model;
  const Vector& gamma;
};

using MlpStepObserver = std::function<void(const MlpStepInfo&)>;

MlpModel train_finite_mlp_full(int hidden_width, const OmegaSampler& sampler,
                               FeatureKind kind, const Dataset& dataset,
                               const LossSpec& loss, OptimizerKind optimizer,
                               const TrainConfig& config,
                               const MlpTrainOptions& options = {},
                               const MlpStepObserver& observer = {});

}  // namespace ntkm
