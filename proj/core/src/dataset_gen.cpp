#include "ntkm/dataset_gen.hpp"

#include <cmath>

#include "ntkm/rng.hpp"

namespace ntkm::bench {

const char* to_string(Task task) {
  switch (task) {
    case Task::TeacherRegression: return "TeacherRegression";
    case Task::SinusoidRegression: return "SinusoidRegression";
    case Task::TwoClusterClassification: return "TwoClusterClassification";
  }
  return "?";
}

Task task_from_string(const std::string& name) {
  if (name == "TeacherRegression") return Task::TeacherRegression;
  if (name == "SinusoidRegression") return Task::SinusoidRegression;
  if (name == "TwoClusterClassification") return Task::TwoClusterClassification;
  throw InvalidArgumentError("unknown task '" + name + "'");
}

Vector TeacherNet::eval(const Vector& x) const {
  const auto hidden = first.rows();
  Vector acts(hidden);
  for (Eigen::Index h = 0; h < hidden; ++h) {
    acts[h] = std::tanh(first.row(h).dot(x.transpose()));
  }
  return (second.transpose() * acts) / std::sqrt(static_cast<double>(hidden));
}

TeacherNet make_teacher(std::uint64_t seed, int input_dim, int output_dim, int hidden) {
  if (input_dim < 1 || output_dim < 1 || hidden < 1) {
    throw InvalidArgumentError("make_teacher: dims must be >= 1");
  }
  TeacherNet net;
  net.first.resize(hidden, input_dim);
  net.second.resize(hidden, output_dim);
  CounterRng first_rng(seed, /*stream=*/101);
  CounterRng second_rng(seed, /*stream=*/102);
  const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (int h = 0; h < hidden; ++h) {
    for (int d = 0; d < input_dim; ++d) net.first(h, d) = scale * first_rng.next_gaussian();
    for (int e = 0; e < output_dim; ++e) net.second(h, e) = second_rng.next_gaussian();
  }
  return net;
}

Dataset generate_dataset(Task task, long n, std::uint64_t seed, int input_dim,
                         int output_dim) {
  if (n < 1) throw InvalidArgumentError("generate_dataset: n must be >= 1");
  if (input_dim < 1 || output_dim < 1) {
    throw InvalidArgumentError("generate_dataset: dims must be >= 1");
  }

  std::vector<Example> examples;
  examples.reserve(static_cast<std::size_t>(n));
  CounterRng rng(seed, /*stream=*/7);

  switch (task) {
    case Task::TeacherRegression: {
      const TeacherNet teacher = make_teacher(seed, input_dim, output_dim);
      for (long i = 0; i < n; ++i) {
        Vector x(input_dim);
        for (int d = 0; d < input_dim; ++d) x[d] = rng.next_gaussian();
        examples.push_back({x, teacher.eval(x)});
      }
      break;
    }
    case Task::SinusoidRegression: {
      if (input_dim != 1 || output_dim != 1) {
        throw DimensionError("SinusoidRegression requires input_dim = output_dim = 1");
      }
      for (long i = 0; i < n; ++i) {
        Vector x(1), y(1);
        x[0] = rng.next_uniform(-2.0, 2.0);
        y[0] = std::sin(3.0 * x[0]);
        examples.push_back({x, y});
      }
      break;
    }
    case Task::TwoClusterClassification: {
      if (output_dim != 1) {
        throw DimensionError("TwoClusterClassification requires output_dim = 1");
      }
      for (long i = 0; i < n; ++i) {
        const bool positive = rng.next_bit();
        Vector x(input_dim), y(1);
        for (int d = 0; d < input_dim; ++d) x[d] = rng.next_gaussian();
        x[0] += positive ? 2.0 : -2.0;
        y[0] = positive ? 1.0 : -1.0;
        examples.push_back({x, y});
      }
      break;
    }
  }

  const std::string name = std::string(to_string(task)) + "-n" + std::to_string(n) +
                           "-s" + std::to_string(seed);
  return Dataset(std::move(examples), name);
}

}  // namespace ntkm::bench
