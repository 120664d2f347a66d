#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace pedcoal {

// splitmix64 step. Doubles as the mix function for deriving stream keys.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t key, std::uint64_t word) {
  std::uint64_t s = key ^ (0x9E3779B97F4A7C15ULL + (word << 1));
  std::uint64_t a = splitmix64_next(s);
  std::uint64_t b = splitmix64_next(s);
  return a ^ (b >> 1) ^ word;
}

/// Deterministic random stream (xoshiro256++ core, splitmix64 seeding).
///
/// child(i) derives an independent substream from the stream's key path
/// alone, never from consumed state, so substream trees are reproducible
/// no matter how draws interleave. Replicate streams are derived as
/// root.child(purpose).child(graph).child(locus).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(0) {
    std::uint64_t s = seed;
    key_ = splitmix64_next(s);
    reset_state();
  }

  /// Independent substream indexed by `index` under this stream's key.
  RandomStream child(std::uint64_t index) const {
    return RandomStream(mix_key(key_, index), 0);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0,1), 53-bit resolution.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool next_bit() { return (next_u64() >> 63) != 0; }

  /// Uniform on {0, .., bound-1}; unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  double next_exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("next_exponential: rate must be positive");
    return -std::log1p(-next_double()) / rate;
  }

  /// Gamma(shape), unit scale. Marsaglia-Tsang; shape < 1 via the boost trick.
  double next_gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = next_double();
      return next_gamma(shape + 1.0) * std::pow(1.0 - u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double next_beta(double a, double b) {
    const double x = next_gamma(a);
    const double y = next_gamma(b);
    return x / (x + y);
  }

  double next_normal() {
    // Marsaglia polar, one value per call; the spare is dropped so the
    // draw count per call stays fixed for reproducibility.
    for (;;) {
      const double u = 2.0 * next_double() - 1.0;
      const double v = 2.0 * next_double() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

 private:
  RandomStream(std::uint64_t key, int) : key_(key) { reset_state(); }

  void reset_state() {
    std::uint64_t s = key_;
    for (auto& w : s_) w = splitmix64_next(s);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t key_;
  std::array<std::uint64_t, 4> s_;
};

}  // namespace pedcoal
