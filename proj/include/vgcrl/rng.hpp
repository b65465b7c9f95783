#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace vgcrl {

// Seeded random source. The raw generator is std::mt19937_64 (bit-exact by
// the standard); the distributions are implemented here rather than taken
// from <random> so that draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. One deviate per call, no caching, so the
  // consumed stream length is a simple function of the call count.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for the ranges used here
    // (n << 2^64), but reject anyway to keep draws exact.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x = gen_();
    while (x > limit) x = gen_();
    return x % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  std::string save_state() const;
  void load_state(const std::string& text);

 private:
  std::mt19937_64 gen_;
};

// Derives an independent stream seed from a base seed and a purpose tag
// (splitmix64 finalizer), so adding/removing consumers of one stream does
// not perturb the others.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t purpose) {
  std::uint64_t x = base + 0x9e3779b97f4a7c15ull * (purpose + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

}  // namespace vgcrl
