#pragma once

// Seeded random source for everything in this library.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard, so identical seeds give identical streams on every platform.
// The distribution transforms below are implemented here (rejection
// sampling for bounded ints, Box-Muller for normals) because the standard
// library's distribution objects are implementation-defined and would break
// cross-platform reproducibility.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace actinet {

// splitmix64 finalizer; used to derive independent per-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(base ^ mix_seed(stream));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(engine_());  // full span
    const std::uint64_t reject_above = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= reject_above);
    return lo + static_cast<std::int64_t>(x % range);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; draws two uniforms per sample, spare discarded so the
  // stream position is input-independent.
  double normal(double mean, double sd) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1 > 1e-300 ? u1 : 1e-300));
    return mean + sd * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Normal truncated below at zero by resampling (cheap for the activity
  // levels used here; falls back to the clipped value after 64 attempts).
  double truncated_normal_nonneg(double mean, double sd) {
    for (int i = 0; i < 64; ++i) {
      const double x = normal(mean, sd);
      if (x >= 0.0) return x;
    }
    return 0.0;
  }

  // Fisher-Yates with this engine; std::shuffle is not portable.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace actinet
