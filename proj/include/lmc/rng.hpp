#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lmc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seedable generator with deterministic substreams. All stochastic code in
// this project draws through this wrapper so that results are reproducible:
// substreams are derived up front, never from wall-clock or thread order.
//
// Variates are produced from raw 64-bit engine output (not the std
// distributions) so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  // Pure substream keyed by index: independent of draws already made.
  // Intended for top-level orchestration (chains, replicates, rows).
  Rng stream(std::uint64_t idx) const {
    return Rng(splitmix64(seed_ ^ splitmix64(idx + 0x9e3779b97f4a7c15ULL)));
  }

  // Stateful child stream: consumes one draw from this generator.
  Rng split() { return Rng(splitmix64(seed_ ^ next_u64())); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Unbiased integer in [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // One N(0,1) draw via Box-Muller; the sine twin is discarded so each call
  // consumes exactly two uniforms and no state is carried between calls.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Gamma(shape, scale) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u;
      do {
        u = uniform();
      } while (u <= 0.0);
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v * scale;
    }
  }

  // InvGamma(shape, scale): reciprocal of Gamma(shape, rate = scale).
  double inv_gamma(double shape, double scale) {
    return 1.0 / gamma(shape, 1.0 / scale);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace lmc
