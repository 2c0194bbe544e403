#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace fragcgp {

// Deterministic PRNG used throughout. Distributions are implemented by hand
// (no std::uniform_real_distribution etc.) so that a given seed produces the
// same stream on every standard library and thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm up so that small seeds decorrelate quickly
    next_u64();
    next_u64();
  }

  // SplitMix64 step
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; second variate cached
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return r * std::cos(a);
  }

  // complex standard normal, E|z|^2 = 1
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
  }

 private:
  std::uint64_t state_;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

// Derives an independent stream seed from a base seed and a textual tag
// (FNV-1a over the tag folded into the seed through SplitMix64 rounds).
// Used to give each (model, generator type), each sample index, etc. its own
// reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : tag) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  Rng mix(seed ^ h);
  return mix.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index) {
  Rng mix(derive_seed(seed, tag) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  return mix.next_u64();
}

}  // namespace fragcgp
