#pragma once

// Deterministic PRNG used everywhere randomness is needed. The generator is
// xoshiro256** (Blackman & Vigna), with its 256-bit state filled from the
// seed by four successive splitmix64 outputs. Both algorithms are fixed
// bit-exactly below, so a given seed produces the same stream on every
// platform. Distribution helpers avoid std::uniform_* on purpose: the
// standard does not pin their output bits.

#include <cstdint>
#include <cstddef>
#include <vector>

namespace kfx {

// splitmix64: state advances by the golden-gamma constant, output is the
// mixed state. Used for stream derivation (seeding, per-restart streams).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// n-th value of the splitmix64 stream started at `seed` (n = 0 is the first).
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t n) {
  std::uint64_t s = seed;
  std::uint64_t v = 0;
  for (std::uint64_t i = 0; i <= n; ++i) v = splitmix64_next(s);
  return v;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  // xoshiro256** next().
  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1): top 53 bits scaled by 2^-53.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1. Fixed-point multiply (Lemire); one
  // draw per call, no rejection loop.
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform double in [-a, a].
  double symmetric(double a) { return a * (2.0 * next_double() - 1.0); }

  // Fisher-Yates. One bounded() draw per element, back to front.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace kfx
