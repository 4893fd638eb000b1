#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ntkm/types.hpp"

namespace ntkm {

// 64-bit FNV-1a over a canonical text serialization. Used to fingerprint
// ensembles, datasets and Gram matrices in run manifests.
class Fnv1a {
 public:
  void update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001B3ull;
    }
  }
  std::uint64_t digest() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

// Exact, locale-independent text form of a double (printf %a).
std::string hexfloat(double v);

std::string fingerprint_hex(std::uint64_t fp);

std::uint64_t dataset_fingerprint(const Dataset& dataset);

}  // namespace ntkm
