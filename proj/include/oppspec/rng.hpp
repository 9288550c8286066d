#pragma once

#include <cmath>
#include <cstdint>

namespace oppspec {

/// xoshiro256++ generator seeded through splitmix64.
///
/// Substreams are derived with split(): every consumer of randomness gets its
/// own stream decorrelated from the parent, so simulations stay reproducible
/// when the order of consumption changes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  /// Independent substream identified by a caller-chosen tag.
  Rng split(std::uint64_t stream) const {
    std::uint64_t x = state_[0] ^ (0x9E3779B97F4A7C15ull * (stream + 1));
    x ^= state_[2] + 0xD1B54A32D192ED03ull * stream;
    return Rng(splitmix64(x));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1); never returns an exact endpoint.
  double uniform() {
    return static_cast<double>((next_u64() >> 11) | 1ull) * 0x1.0p-53;
  }

  /// Exponential with the given rate; strictly positive.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 6.283185307179586476925286766559 * uniform();
    cached_ = r * std::sin(phi);
    have_cached_ = true;
    return r * std::cos(phi);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace oppspec
