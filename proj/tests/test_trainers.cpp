#include <doctest.h>

#include <cmath>

#include "ntkm/numerics.hpp"
#include "ntkm/rng.hpp"
#include "ntkm/trainers.hpp"

using namespace ntkm;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

Dataset random_dataset(std::uint64_t seed, int n, int input_dim, int output_dim) {
  CounterRng rng(seed, 0);
  std::vector<Example> examples;
  for (int i = 0; i < n; ++i) {
    Vector x(input_dim), y(output_dim);
    for (int d = 0; d < input_dim; ++d) x[d] = rng.next_gaussian();
    for (int e = 0; e < output_dim; ++e) y[e] = rng.next_gaussian();
    examples.push_back({x, y});
  }
  return Dataset(std::move(examples), "random-" + std::to_string(seed));
}

std::shared_ptr<const FeatureEnsemble> make_ensemble(std::uint64_t seed, int dim,
                                                     int width,
                                                     FeatureKind kind = FeatureKind::ReluDot) {
  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, dim, seed};
  return std::make_shared<const FeatureEnsemble>(sample_ensemble(sampler, kind, width));
}

double max_rel_gap(const Vector& a, const Vector& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, relative_error(a[i], b[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("sgd_update") {
  OptimizerState state(OptimizerKind::Sgd, 2, 2);
  const Matrix zero = Matrix::Zero(2, 2);
  CHECK(sgd_update(state, zero, 0.1) == zero);

  OptimizerState one(OptimizerKind::Sgd, 1, 1);
  Matrix grad(1, 1);
  grad << 2.0;
  const Matrix update = sgd_update(one, grad, 0.1);
  CHECK(update(0, 0) == doctest::Approx(-0.2).epsilon(1e-15));

  // Exactly homogeneous in alpha (power-of-two scaling is lossless).
  OptimizerState a(OptimizerKind::Sgd, 2, 3), b(OptimizerKind::Sgd, 2, 3);
  CounterRng rng(3, 0);
  Matrix g(2, 3);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) g(i, j) = rng.next_gaussian();
  }
  CHECK(sgd_update(a, g, 0.5) == 2.0 * sgd_update(b, g, 0.25));

  CHECK_THROWS_AS(sgd_update(a, Matrix::Zero(1, 1), 0.1), DimensionError);
}

TEST_CASE("adam_update") {
  TrainConfig config;
  config.alpha = 0.01;

  SUBCASE("first step is a sign step when epsilon is zero") {
    TrainConfig c0 = config;
    c0.epsilon = 0.0;
    OptimizerState state(OptimizerKind::Adam, 2, 2);
    Matrix grad(2, 2);
    grad << 3.0, -0.1, 0.4, -7.0;
    const Matrix update = adam_update(state, grad, c0);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(update(i, j) ==
              doctest::Approx(-c0.alpha * (grad(i, j) > 0 ? 1.0 : -1.0)).epsilon(1e-12));
      }
    }
  }

  SUBCASE("constant gradient gives a constant update") {
    OptimizerState state(OptimizerKind::Adam, 2, 1);
    const Matrix ones = Matrix::Ones(2, 1);
    for (int t = 1; t <= 8; ++t) {
      const Matrix update = adam_update(state, ones, config);
      for (int i = 0; i < 2; ++i) {
        CHECK(update(i, 0) ==
              doctest::Approx(-config.alpha / (1.0 + config.epsilon)).epsilon(1e-12));
      }
    }
  }

  SUBCASE("zero gradient with positive epsilon is a zero update") {
    OptimizerState state(OptimizerKind::Adam, 3, 2);
    const Matrix update = adam_update(state, Matrix::Zero(3, 2), config);
    CHECK(update.isZero(0.0));
  }
}

TEST_CASE("adamstar_update") {
  TrainConfig config;
  config.alpha = 0.01;

  SUBCASE("first step uses the width-scaled mean second moment") {
    // H = 2, J = [3, -1]^T: v1 uses mean(9, 1) = 5 and the denominator is
    // sqrt(H * v) = sqrt(10). This is the scaling under which the dual kernel
    // machine reproduces the explicit model exactly.
    TrainConfig c0 = config;
    c0.epsilon = 0.0;
    OptimizerState state(OptimizerKind::AdamStar, 2, 1);
    Matrix grad(2, 1);
    grad << 3.0, -1.0;
    const Matrix update = adamstar_update(state, grad, c0);
    CHECK(state.second_moment_mean()[0] / (1.0 - c0.beta2) == doctest::Approx(5.0));
    CHECK(update(0, 0) == doctest::Approx(-c0.alpha * 3.0 / std::sqrt(10.0)).epsilon(1e-14));
    CHECK(update(1, 0) == doctest::Approx(c0.alpha * 1.0 / std::sqrt(10.0)).epsilon(1e-14));
  }

  SUBCASE("H = 1 reduces to adam exactly") {
    OptimizerState star(OptimizerKind::AdamStar, 1, 3);
    OptimizerState adam(OptimizerKind::Adam, 1, 3);
    CounterRng rng(17, 0);
    for (int t = 1; t <= 10; ++t) {
      Matrix grad(1, 3);
      for (int j = 0; j < 3; ++j) grad(0, j) = rng.next_gaussian();
      CHECK(adamstar_update(star, grad, config) == adam_update(adam, grad, config));
    }
  }

  SUBCASE("constant gradient rows scale adam by 1/sqrt(H)") {
    TrainConfig c0 = config;
    c0.epsilon = 0.0;
    const int width = 4;
    OptimizerState star(OptimizerKind::AdamStar, width, 1);
    OptimizerState adam(OptimizerKind::Adam, width, 1);
    Matrix grad = Matrix::Constant(width, 1, 0.7);
    for (int t = 1; t <= 5; ++t) {
      const Matrix u_star = adamstar_update(star, grad, c0);
      const Matrix u_adam = adam_update(adam, grad, c0);
      for (int h = 0; h < width; ++h) {
        CHECK(relative_error(u_star(h, 0) * std::sqrt(static_cast<double>(width)),
                             u_adam(h, 0)) <= 1e-14);
      }
    }
  }
}

TEST_CASE("kernel machine sgd: one-step closed form") {
  auto ens = make_ensemble(5, 3, 8);
  TrainConfig config;
  config.alpha = 0.1;
  const KernelSpec spec = KernelSpec::empirical(ens);
  KernelMachine machine(spec, config, TrainerMode::Sgd, 2);

  CHECK(machine.predict(vec({1, 0, 0})).isZero(0.0));  // untrained

  const Example ex{vec({0.4, -1.2, 0.7}), vec({1.0, -2.0})};
  machine.step(ex, LossSpec{});
  // f(x_1) was zero, so gamma_1 = -y_1 and f(x) = alpha K(x, x_1) y_1.
  CHECK(machine.gradients()[0] == -ex.y);
  CHECK(machine.coeffs()[0] == Vector::Ones(2));

  const Vector probe = vec({1.5, 0.3, -0.2});
  const double k = kernel_eval(spec, probe, ex.x);
  const Vector expected = config.alpha * k * ex.y;
  CHECK(max_rel_gap(machine.predict(probe), expected) <= 1e-15);
}

TEST_CASE("kernel machine adamstar: first-step coefficients") {
  // Analytic kernel with x = [2] gives K(x, x) = ||x||^2 / 2 = 2 exactly.
  TrainConfig config;
  config.alpha = 0.01;
  config.epsilon = 0.0;
  KernelMachine machine(KernelSpec::analytic_relu_gaussian(1), config,
                        TrainerMode::AdamStar, 2);
  const Example ex{vec({2.0}), vec({1.0, -0.5})};  // gamma_1 = [-1, 0.5]
  machine.step(ex, LossSpec{});

  // Bias corrections cancel at t = 1: c_1 = 1 / sqrt(K(x,x) * gamma^2).
  const Vector c1 = machine.coeffs()[0];
  CHECK(relative_error(c1[0], 1.0 / std::sqrt(2.0)) <= 1e-14);
  CHECK(relative_error(c1[1], std::sqrt(2.0)) <= 1e-14);
}

TEST_CASE("kernel machine matches the explicit oracle") {
  const Dataset ds = random_dataset(123, 5, 3, 2);
  const Dataset probes = random_dataset(321, 6, 3, 2);

  for (const TrainerMode mode : {TrainerMode::Sgd, TrainerMode::AdamStar}) {
    for (const long steps : {3L, 47L}) {
      auto ens = make_ensemble(9, 3, 16);
      TrainConfig config;
      config.alpha = mode == TrainerMode::Sgd ? 0.1 : 1e-3;
      config.steps = steps;

      KernelMachine machine(KernelSpec::empirical(ens), config, mode, 2);
      for (long t = 1; t <= steps; ++t) machine.step(ds.example_for_step(t), LossSpec{});

      const FiniteModel oracle = train_finite_frozen(
          ens, ds, LossSpec{},
          mode == TrainerMode::Sgd ? OptimizerKind::Sgd : OptimizerKind::AdamStar, config);

      for (const Example& ex : ds.examples()) {
        CHECK(max_rel_gap(machine.predict(ex.x), oracle.predict(ex.x)) <= 1e-9);
      }
      for (const Example& ex : probes.examples()) {
        CHECK(max_rel_gap(machine.predict(ex.x), oracle.predict(ex.x)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("vhat tracks H times the finite second moment") {
  const Dataset ds = random_dataset(77, 6, 4, 2);
  auto ens = make_ensemble(13, 4, 8);
  TrainConfig config;
  config.alpha = 1e-3;
  config.steps = 30;

  KernelMachine machine(KernelSpec::empirical(ens), config, TrainerMode::AdamStar, 2);
  for (long t = 1; t <= config.steps; ++t) machine.step(ds.example_for_step(t), LossSpec{});

  const double width = 8.0;
  train_finite_frozen(ens, ds, LossSpec{}, OptimizerKind::AdamStar, config,
                      [&](const FrozenStepInfo& info) {
                        const Vector& vhat = machine.vhat_history()[info.step - 1];
                        const Vector scaled = width * info.state.second_moment_mean();
                        CHECK(max_rel_gap(vhat, scaled) <= 1e-10);
                      });
}

TEST_CASE("incremental coefficients equal the direct summation") {
  const Dataset ds = random_dataset(31, 4, 3, 2);
  auto ens = make_ensemble(19, 3, 12);
  TrainConfig config;
  config.alpha = 1e-3;
  config.steps = 25;

  KernelMachine machine(KernelSpec::empirical(ens), config, TrainerMode::AdamStar, 2);
  for (long t = 1; t <= config.steps; ++t) machine.step(ds.example_for_step(t), LossSpec{});

  const long T = config.steps;
  for (long i = 1; i <= T; ++i) {
    Vector direct = Vector::Zero(2);
    for (long j = i; j <= T; ++j) {
      const Vector& vhat = machine.vhat_history()[static_cast<std::size_t>(j - 1)];
      const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(j));
      const Vector d_j =
          ((vhat / bias2).cwiseSqrt().array() + config.epsilon).cwiseInverse();
      const double w = std::pow(config.beta1, static_cast<double>(j - i)) *
                       (1.0 - config.beta1) /
                       (1.0 - std::pow(config.beta1, static_cast<double>(j)));
      direct += w * d_j;
    }
    CHECK(max_rel_gap(machine.coeffs()[static_cast<std::size_t>(i - 1)], direct) <= 1e-12);
  }
}

TEST_CASE("adamstar machine with unit coefficients walks the sgd path") {
  const Dataset ds = random_dataset(41, 5, 3, 1);
  auto ens = make_ensemble(23, 3, 8);
  TrainConfig config;
  config.alpha = 0.05;
  config.steps = 20;

  KernelMachine sgd(KernelSpec::empirical(ens), config, TrainerMode::Sgd, 1);
  KernelMachine star(KernelSpec::empirical(ens), config, TrainerMode::AdamStar, 1);
  for (long t = 1; t <= config.steps; ++t) {
    sgd.step(ds.example_for_step(t), LossSpec{});
    star.step(ds.example_for_step(t), LossSpec{});
    star.set_all_coefficients(Vector::Ones(1));
  }
  const Vector probe = vec({0.2, -0.9, 1.4});
  CHECK(star.predict(probe) == sgd.predict(probe));
  for (const Example& ex : ds.examples()) {
    CHECK(star.predict(ex.x) == sgd.predict(ex.x));
  }
}

TEST_CASE("adamstar with zero decays degrades continuously as epsilon grows") {
  const Dataset ds = random_dataset(59, 4, 3, 2);
  auto ens = make_ensemble(29, 3, 8);
  const KernelSpec spec = KernelSpec::empirical(ens);
  const long steps = 12;
  const Vector probe = vec({0.5, 0.5, -0.5});

  // beta1 = beta2 = 0 strips momentum and second-moment memory; as epsilon
  // grows, every c_i collapses toward 1/epsilon and the machine approaches a
  // frozen-gradient limit with gamma_i = -y_i.
  TrainConfig base;
  base.alpha = 1e-3;
  base.beta1 = 0.0;
  base.beta2 = 0.0;
  base.steps = steps;
  Vector limit = Vector::Zero(2);
  for (long i = 1; i <= steps; ++i) {
    const Example& ex = ds.example_for_step(i);
    limit += base.alpha * kernel_eval(spec, probe, ex.x) * ex.y;
  }

  double previous = std::numeric_limits<double>::infinity();
  for (const double eps : {1e4, 1e6, 1e8}) {
    TrainConfig config = base;
    config.epsilon = eps;
    KernelMachine machine(spec, config, TrainerMode::AdamStar, 2);
    for (long t = 1; t <= steps; ++t) machine.step(ds.example_for_step(t), LossSpec{});
    const Vector scaled = eps * machine.predict(probe);
    CHECK(scaled.allFinite());
    const double gap = (scaled - limit).cwiseAbs().maxCoeff();
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("frozen sgd one-step closed form") {
  auto ens = make_ensemble(37, 3, 8);
  const Example ex{vec({0.3, 0.9, -1.1}), vec({2.0, -1.0})};
  const Dataset ds({ex}, "one");
  TrainConfig config;
  config.alpha = 0.1;
  config.steps = 1;
  const FiniteModel model = train_finite_frozen(ens, ds, LossSpec{}, OptimizerKind::Sgd, config);

  const double inv_sqrt_h = 1.0 / std::sqrt(8.0);
  const Vector phi = feature_row(*ens, ex.x);
  for (int h = 0; h < 8; ++h) {
    for (int e = 0; e < 2; ++e) {
      CHECK(model.weights()(h, e) ==
            doctest::Approx(config.alpha * inv_sqrt_h * phi[h] * ex.y[e]).epsilon(1e-15));
    }
  }
}

TEST_CASE("divergence reports the failing step") {
  auto ens = make_ensemble(43, 3, 4);
  const Dataset ds = random_dataset(43, 3, 3, 1);
  TrainConfig config;
  config.alpha = 1e200;
  config.steps = 10;

  CHECK_THROWS_AS(train_finite_frozen(ens, ds, LossSpec{}, OptimizerKind::Sgd, config),
                  DivergenceError);
  try {
    train_finite_frozen(ens, ds, LossSpec{}, OptimizerKind::Sgd, config);
  } catch (const DivergenceError& e) {
    CHECK(e.step_index() >= 1);
    CHECK(e.step_index() <= 10);
  }

  KernelMachine machine(KernelSpec::empirical(ens), config, TrainerMode::Sgd, 1);
  CHECK_THROWS_AS(
      [&] {
        for (long t = 1; t <= config.steps; ++t) {
          machine.step(ds.example_for_step(t), LossSpec{});
        }
      }(),
      DivergenceError);
}

TEST_CASE("mlp with first layer pinned matches the frozen trainer exactly") {
  const Dataset ds = random_dataset(61, 6, 3, 2);
  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, 3, 67};
  auto ens = std::make_shared<const FeatureEnsemble>(
      sample_ensemble(sampler, FeatureKind::ReluDot, 8));

  for (const OptimizerKind optimizer : {OptimizerKind::Sgd, OptimizerKind::Adam,
                                        OptimizerKind::AdamStar}) {
    TrainConfig config;
    config.alpha = optimizer == OptimizerKind::Sgd ? 0.05 : 1e-3;
    config.steps = 15;

    MlpTrainOptions options;
    options.first_layer_alpha = 0.0;
    const MlpModel mlp = train_finite_mlp_full(8, sampler, FeatureKind::ReluDot, ds,
                                               LossSpec{}, optimizer, config, options);
    const FiniteModel frozen =
        train_finite_frozen(ens, ds, LossSpec{}, optimizer, config);

    CHECK(mlp.first_layer() == ens->omegas());
    CHECK(mlp.second_layer() == frozen.weights());
    for (const Example& ex : ds.examples()) {
      CHECK(mlp.predict(ex.x) == frozen.predict(ex.x));
    }
  }
}

TEST_CASE("mlp backprop matches finite differences") {
  // Recover the step-2 gradients from an SGD step and compare against central
  // finite differences of the per-example loss at the step-1 weights.
  const Dataset ds = random_dataset(71, 3, 3, 2);
  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, 3, 73};
  const int width = 4;
  TrainConfig config;
  config.alpha = 1e-2;

  config.steps = 1;
  const MlpModel after1 = train_finite_mlp_full(width, sampler, FeatureKind::TanhDot, ds,
                                                LossSpec{}, OptimizerKind::Sgd, config);
  config.steps = 2;
  const MlpModel after2 = train_finite_mlp_full(width, sampler, FeatureKind::TanhDot, ds,
                                                LossSpec{}, OptimizerKind::Sgd, config);

  const Matrix grad_first = (after1.first_layer() - after2.first_layer()) / config.alpha;
  const Matrix grad_second = (after1.second_layer() - after2.second_layer()) / config.alpha;

  const Example& ex = ds.example_for_step(2);
  auto loss_at = [&](const Matrix& first, const Matrix& second) {
    Vector acts(width);
    for (int h = 0; h < width; ++h) {
      acts[h] = std::tanh(first.row(h).dot(ex.x.transpose()));
    }
    const Vector f = (second.transpose() * acts) / std::sqrt(static_cast<double>(width));
    return loss_value(LossSpec{}, f, ex.y);
  };

  const double fd_step = 1e-5;
  for (int h = 0; h < width; ++h) {
    for (int d = 0; d < 3; ++d) {
      Matrix hi = after1.first_layer(), lo = after1.first_layer();
      hi(h, d) += fd_step;
      lo(h, d) -= fd_step;
      const double fd =
          (loss_at(hi, after1.second_layer()) - loss_at(lo, after1.second_layer())) /
          (2.0 * fd_step);
      if (std::abs(fd) > 1e-8) {
        CHECK(relative_error(grad_first(h, d), fd) <= 1e-5);
      } else {
        CHECK(std::abs(grad_first(h, d) - fd) <= 1e-7);
      }
    }
    for (int e = 0; e < 2; ++e) {
      Matrix hi = after1.second_layer(), lo = after1.second_layer();
      hi(h, e) += fd_step;
      lo(h, e) -= fd_step;
      const double fd = (loss_at(after1.first_layer(), hi) -
                         loss_at(after1.first_layer(), lo)) /
                        (2.0 * fd_step);
      if (std::abs(fd) > 1e-8) {
        CHECK(relative_error(grad_second(h, e), fd) <= 1e-5);
      } else {
        CHECK(std::abs(grad_second(h, e) - fd) <= 1e-7);
      }
    }
  }
}

TEST_CASE("mlp loss is non-increasing early on a separable instance") {
  // Two clusters split on the first coordinate, +-1 labels.
  CounterRng rng(83, 0);
  std::vector<Example> examples;
  for (int i = 0; i < 12; ++i) {
    const bool positive = i % 2 == 0;
    Vector x(3), y(1);
    for (int d = 0; d < 3; ++d) x[d] = 0.3 * rng.next_gaussian();
    x[0] += positive ? 2.0 : -2.0;
    y[0] = positive ? 1.0 : -1.0;
    examples.push_back({x, y});
  }
  const Dataset ds(examples, "separable");

  const OmegaSampler sampler{OmegaSampler::Kind::StandardGaussian, 3, 89};
  TrainConfig config;
  config.alpha = 1e-3;
  config.steps = 10;

  std::vector<double> losses;
  train_finite_mlp_full(16, sampler, FeatureKind::TanhDot, ds, LossSpec{},
                        OptimizerKind::Sgd, config, {},
                        [&](const MlpStepInfo& info) {
                          double acc = 0.0;
                          for (const Example& ex : ds.examples()) {
                            acc += loss_value(LossSpec{}, info.model.predict(ex.x), ex.y);
                          }
                          losses.push_back(acc / static_cast<double>(ds.size()));
                        });
  REQUIRE(losses.size() == 10);
  for (std::size_t i = 1; i < losses.size(); ++i) {
    CHECK(losses[i] <= losses[i - 1] + 1e-15);
  }
}
