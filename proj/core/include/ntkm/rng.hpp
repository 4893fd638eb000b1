#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ntkm {

// SplitMix64 finalizer (full-avalanche 64-bit mixer).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-based generator: every (seed, stream, index) triple maps to an
// independent word, so any draw can be addressed directly. This is what makes
// widening an ensemble keep its existing rows and lets parallel consumers
// share one seed without coordination.
constexpr std::uint64_t counter_word(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t index) noexcept {
  std::uint64_t z = splitmix64(seed ^ 0x6A09E667F3BCC909ull);
  z = splitmix64(z ^ splitmix64(stream ^ 0xBB67AE8584CAA73Bull));
  z = splitmix64(z ^ splitmix64(index ^ 0x3C6EF372FE94F82Bull));
  return z;
}

// Uniform in (0, 1]; never 0, so log() downstream is safe.
inline double u64_to_unit(std::uint64_t w) noexcept {
  return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) noexcept {
  return u64_to_unit(counter_word(seed, stream, index));
}

// Standard normal via Box-Muller on two addressed uniforms.
inline double counter_gaussian(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t index) noexcept {
  const double u1 = counter_uniform(seed, stream, 2 * index);
  const double u2 = counter_uniform(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Sequential view over one (seed, stream) pair for code that just wants the
// next draw.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_word() noexcept { return counter_word(seed_, stream_, index_++); }
  double next_uniform() noexcept { return u64_to_unit(next_word()); }
  // Uniform on [lo, hi).
  double next_uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * (static_cast<double>(next_word() >> 11) * 0x1.0p-53);
  }
  // Consumes two sequential words (Box-Muller), so it shares the index space
  // with the uniform draws without overlap.
  double next_gaussian() noexcept {
    const double u1 = u64_to_unit(next_word());
    const double u2 = u64_to_unit(next_word());
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  bool next_bit() noexcept { return (next_word() & 1ull) != 0; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
};

}  // namespace ntkm
