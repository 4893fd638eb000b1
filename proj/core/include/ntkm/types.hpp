#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "ntkm/errors.hpp"

namespace ntkm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One supervised pair (x, y). Every example in a dataset shares the same
// input and output lengths.
struct Example {
  Vector x;
  Vector y;
};

// Ordered, non-empty list of examples. Order matters: online training step t
// (1-based) uses example ((t - 1) mod n) + 1, cycling through the dataset.
class Dataset {
 public:
  Dataset(std::vector<Example> examples, std::string name);

  std::size_t size() const noexcept { return examples_.size(); }
  int input_dim() const noexcept { return input_dim_; }
  int output_dim() const noexcept { return output_dim_; }
  const std::string& name() const noexcept { return name_; }
  const Example& operator[](std::size_t i) const { return examples_[i]; }
  const std::vector<Example>& examples() const noexcept { return examples_; }

  // The example used by 1-based training step `step`.
  const Example& example_for_step(long step) const {
    return examples_[static_cast<std::size_t>((step - 1) % static_cast<long>(examples_.size()))];
  }

 private:
  std::vector<Example> examples_;
  std::string name_;
  int input_dim_ = 0;
  int output_dim_ = 0;
};

enum class LossKind { SquaredError };

// L(f, y). SquaredError is 0.5 * ||f - y||^2; the enum is the extension point.
struct LossSpec {
  LossKind kind = LossKind::SquaredError;
};

double loss_value(const LossSpec& loss, const Vector& f, const Vector& y);

// dL/df. For SquaredError this is exactly f - y.
Vector loss_grad(const LossSpec& loss, const Vector& f, const Vector& y);

// Hyperparameters shared by every trainer.
struct TrainConfig {
  double alpha = 1e-3;     // step size, > 0
  double beta1 = 0.9;      // first-moment decay, in [0, 1)
  double beta2 = 0.999;    // second-moment decay, in [0, 1)
  double epsilon = 1e-8;   // denominator guard, >= 0
  long steps = 1;          // total training steps, >= 1
  std::uint64_t seed = 0;  // reproducibility seed

  void validate() const;
};

}  // namespace ntkm
