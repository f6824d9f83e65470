#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace latproph {

// splitmix64 finalizer; used to derive independent substream seeds from a
// (seed, index) pair so parallel work is schedule-independent.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic RNG: mt19937_64 core (bit-stable per the standard) with
// hand-rolled distributions, since std::*_distribution output is
// implementation-defined and would break bit-identical reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), unbiased via rejection
  std::int64_t uniform_int(std::int64_t n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::int64_t>(x % un);
  }

  // standard normal, Box-Muller (one draw per call, no cached state)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(v.size())))];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace latproph
