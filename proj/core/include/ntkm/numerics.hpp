#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace ntkm {

// Pairwise (cascade) summation. Error grows like log(n) in ulps instead of n,
// which the quadrature mass checks rely on. Deterministic for a fixed input
// order regardless of how callers were scheduled.
inline double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 32) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// |a - b| relative to the larger magnitude, with a floor so that two values
// that are both essentially zero compare equal.
inline double relative_error(double a, double b, double floor = 1e-12) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

}  // namespace ntkm
