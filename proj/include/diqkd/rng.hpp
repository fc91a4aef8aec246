#pragma once

#include <cmath>
#include <cstdint>

namespace diqkd {

// Counter-based random stream: the sequence is a pure function of (seed, index),
// so work split across any number of threads draws identical samples per index.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index) noexcept
      : state_(mix(mix(seed + 0x9e3779b97f4a7c15ull) + index)) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // uniform in [0, 1), 53-bit resolution
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform in [0, n)
  std::uint64_t next_below(std::uint64_t n) noexcept {
    return next_u64() % n;
  }

  // standard exponential, rate 1
  double next_exponential() noexcept {
    return -std::log1p(-next_double());
  }

  // standard normal (Box-Muller, one value per call; cached twin discarded)
  double next_gaussian() noexcept {
    double u = 1.0 - next_double();
    double v = next_double();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace diqkd
