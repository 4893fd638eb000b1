#pragma once

#include <cstdint>
#include <string>

#include "ntkm/features.hpp"
#include "ntkm/types.hpp"

namespace ntkm::bench {

enum class Task { TeacherRegression, SinusoidRegression, TwoClusterClassification };

const char* to_string(Task task);
Task task_from_string(const std::string& name);

// Fixed random two-layer tanh network used as the label source for
// TeacherRegression. Exposed so tests can hand a student the teacher's own
// features and confirm the task is realizable.
struct TeacherNet {
  Matrix first;   // hidden x D, rows scaled so preactivations are ~N(0,1)
  Matrix second;  // hidden x E

  Vector eval(const Vector& x) const;
};

TeacherNet make_teacher(std::uint64_t seed, int input_dim, int output_dim,
                        int hidden = 16);

// Deterministic task sampler. TeacherRegression draws x ~ N(0, I_D);
// SinusoidRegression requires D = E = 1 with y = sin(3x) on x ~ U[-2, 2];
// TwoClusterClassification requires E = 1 with +-1 labels on two Gaussian
// blobs split along the first coordinate.
Dataset generate_dataset(Task task, long n, std::uint64_t seed, int input_dim,
                         int output_dim);

}  // namespace ntkm::bench
