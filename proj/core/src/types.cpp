#include "ntkm/types.hpp"

#include <cmath>
#include <utility>

namespace ntkm {

namespace {

void require_same_length(const Vector& f, const Vector& y, const char* op) {
  if (f.size() != y.size()) {
    throw DimensionError(std::string(op) + ": f has length " +
                         std::to_string(f.size()) + ", y has length " +
                         std::to_string(y.size()));
  }
}

}  // namespace

Dataset::Dataset(std::vector<Example> examples, std::string name)
    : examples_(std::move(examples)), name_(std::move(name)) {
  if (examples_.empty()) {
    throw InvalidArgumentError("dataset '" + name_ + "' is empty");
  }
  input_dim_ = static_cast<int>(examples_.front().x.size());
  output_dim_ = static_cast<int>(examples_.front().y.size());
  for (const Example& ex : examples_) {
    if (ex.x.size() != input_dim_ || ex.y.size() != output_dim_) {
      throw DimensionError("dataset '" + name_ + "' mixes example shapes");
    }
    if (!ex.x.allFinite() || !ex.y.allFinite()) {
      throw InvalidArgumentError("dataset '" + name_ + "' has non-finite entries");
    }
  }
}

double loss_value(const LossSpec& loss, const Vector& f, const Vector& y) {
  require_same_length(f, y, "loss_value");
  switch (loss.kind) {
    case LossKind::SquaredError:
      return 0.5 * (f - y).squaredNorm();
  }
  throw InvalidArgumentError("unknown loss kind");
}

Vector loss_grad(const LossSpec& loss, const Vector& f, const Vector& y) {
  require_same_length(f, y, "loss_grad");
  switch (loss.kind) {
    case LossKind::SquaredError:
      return f - y;
  }
  throw InvalidArgumentError("unknown loss kind");
}

void TrainConfig::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgumentError("alpha must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidArgumentError("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidArgumentError("beta2 must be in [0, 1)");
  if (!(epsilon >= 0.0)) throw InvalidArgumentError("epsilon must be >= 0");
  if (steps < 1) throw InvalidArgumentError("steps must be >= 1");
}

}  // namespace ntkm
