#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace polarnav::sim {

/// Stateless generator: every draw is a pure function of
/// (seed, stream, index, lane), so streams never influence each other and
/// any sample can be regenerated in isolation.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 1))) {}

  std::uint64_t bits(std::uint64_t index, std::uint32_t lane = 0) const {
    return mix(key_ ^ mix(index * 0x9E3779B97F4A7C15ull + lane));
  }

  /// Uniform in [0, 1).
  double uniform(std::uint64_t index, std::uint32_t lane = 0) const {
    return static_cast<double>(bits(index, lane) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on lanes (2*lane, 2*lane+1).
  double normal(std::uint64_t index, std::uint32_t lane = 0) const {
    const double u1 = 1.0 - uniform(index, 2 * lane);  // (0, 1]
    const double u2 = uniform(index, 2 * lane + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace polarnav::sim
