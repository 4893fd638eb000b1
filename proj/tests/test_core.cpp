#include <doctest.h>

#include "ntkm/rng.hpp"
#include "ntkm/types.hpp"

using namespace ntkm;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Central finite differences of loss_value, the independent oracle for
// loss_grad.
Vector fd_loss_grad(const LossSpec& loss, const Vector& f, const Vector& y,
                    double step = 1e-5) {
  Vector g(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    Vector hi = f, lo = f;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (loss_value(loss, hi, y) - loss_value(loss, lo, y)) / (2.0 * step);
  }
  return g;
}

}  // namespace

TEST_CASE("loss_value squared error") {
  const LossSpec loss;
  CHECK(loss_value(loss, vec({0, 0}), vec({0, 0})) == 0.0);
  CHECK(loss_value(loss, vec({3.5}), vec({3.5})) == 0.0);
  CHECK(loss_value(loss, vec({1, 0}), vec({0, 2})) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(loss_value(loss, vec({1, 2}), vec({1})), DimensionError);
}

TEST_CASE("loss_grad squared error") {
  const LossSpec loss;
  CHECK(loss_grad(loss, vec({0, 0}), vec({1, -1})) == vec({-1, 1}));
  CHECK(loss_grad(loss, vec({0.25, -3}), vec({0.25, -3})).isZero(0.0));
  const Vector g = loss_grad(loss, vec({2}), vec({0.5}));
  CHECK(g[0] == doctest::Approx(1.5).epsilon(1e-15));
  const Vector fd = fd_loss_grad(loss, vec({2}), vec({0.5}));
  CHECK(std::abs(g[0] - fd[0]) / std::abs(fd[0]) <= 1e-6);
  CHECK_THROWS_AS(loss_grad(loss, vec({1, 2}), vec({1})), DimensionError);
}

TEST_CASE("loss_grad matches finite differences on random inputs") {
  const LossSpec loss;
  CounterRng rng(13, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int e = 1 + static_cast<int>(rng.next_word() % 5);
    Vector f(e), y(e);
    for (int i = 0; i < e; ++i) {
      f[i] = rng.next_uniform(-2.0, 2.0);
      y[i] = rng.next_uniform(-2.0, 2.0);
      // Keep the gradient away from zero so relative error is well defined.
      if (std::abs(f[i] - y[i]) < 0.05) y[i] += 0.5;
    }
    const Vector g = loss_grad(loss, f, y);
    const Vector fd = fd_loss_grad(loss, f, y);
    for (int i = 0; i < e; ++i) {
      CHECK(std::abs(g[i] - fd[i]) / std::abs(fd[i]) <= 1e-6);
    }
  }
}

TEST_CASE("loss is zero iff prediction equals target") {
  const LossSpec loss;
  CounterRng rng(29, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector f(3), y(3);
    for (int i = 0; i < 3; ++i) {
      f[i] = rng.next_uniform(-1.0, 1.0);
      y[i] = rng.next_uniform(-1.0, 1.0);
    }
    if (f == y) continue;
    CHECK(loss_value(loss, f, y) > 0.0);
    CHECK(loss_value(loss, f, f) == 0.0);
  }
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(Dataset({}, "empty"), InvalidArgumentError);
  CHECK_THROWS_AS(Dataset({{vec({1, 2}), vec({1})}, {vec({1}), vec({1})}}, "mixed"),
                  DimensionError);

  const Dataset ds({{vec({1}), vec({10})}, {vec({2}), vec({20})}, {vec({3}), vec({30})}},
                   "three");
  CHECK(ds.size() == 3);
  CHECK(ds.input_dim() == 1);
  CHECK(ds.output_dim() == 1);
  // Step t cycles through examples in order.
  CHECK(ds.example_for_step(1).y[0] == 10);
  CHECK(ds.example_for_step(3).y[0] == 30);
  CHECK(ds.example_for_step(4).y[0] == 10);
  CHECK(ds.example_for_step(8).y[0] == 20);
}

TEST_CASE("train config validation") {
  TrainConfig config;
  config.validate();

  TrainConfig bad = config;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
  bad = config;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
  bad = config;
  bad.beta2 = -0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
  bad = config;
  bad.epsilon = -1e-9;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
  bad = config;
  bad.steps = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
}
