#include "ntkm/fingerprint.hpp"

#include <cstdio>

namespace ntkm {

std::string hexfloat(double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%a", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[20];
  const int n = std::snprintf(buf, sizeof buf, "%016llx",
                              static_cast<unsigned long long>(fp));
  return std::string(buf, static_cast<std::size_t>(n));
}

std::uint64_t dataset_fingerprint(const Dataset& dataset) {
  Fnv1a h;
  h.update("dataset v1\n");
  h.update(std::to_string(dataset.size()) + " " +
           std::to_string(dataset.input_dim()) + " " +
           std::to_string(dataset.output_dim()) + "\n");
  for (const Example& ex : dataset.examples()) {
    for (Eigen::Index i = 0; i < ex.x.size(); ++i) h.update(hexfloat(ex.x[i]) + " ");
    for (Eigen::Index i = 0; i < ex.y.size(); ++i) h.update(hexfloat(ex.y[i]) + " ");
    h.update("\n");
  }
  return h.digest();
}

}  // namespace ntkm
