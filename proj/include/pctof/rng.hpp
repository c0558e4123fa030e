#pragma once

#include <cmath>
#include <cstdint>

#include "pctof/constants.hpp"
#include "pctof/errors.hpp"

namespace pctof {

/// SplitMix64 finalizer; a stateless 64-bit mixing function.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Derives an independent child seed from a base seed, a purpose tag and an
/// index. Used so per-offset / per-sweep-sample noise streams do not depend
/// on evaluation order or worker count.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t purpose,
                                std::uint64_t index) {
  return mix64(mix64(seed ^ (purpose * 0xbf58476d1ce4e5b9ull)) +
               index * 0x9e3779b97f4a7c15ull);
}

namespace stream_purpose {
inline constexpr std::uint64_t taps = 0x7461u;        // plain tap render
inline constexpr std::uint64_t coarse_sweep = 0x6373u;
inline constexpr std::uint64_t fine_sweep = 0x6673u;
inline constexpr std::uint64_t rail = 0x7261u;
inline constexpr std::uint64_t trial = 0x7472u;
}  // namespace stream_purpose

/// Deterministic counter-based random stream. A stream is keyed by
/// (seed, pixel, tap); draws depend only on the key and the draw count,
/// never on scheduling, so renders are reproducible for any worker count.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t key) : state_(key) {}

  /// Stream key for one pixel/tap cell of a frame render.
  static NoiseStream for_cell(std::uint64_t seed, std::uint64_t pixel,
                              std::uint64_t tap) {
    return NoiseStream(mix64(mix64(seed) ^
                             (pixel * 0xd6e8feb86659fd93ull + tap + 1)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform draw in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, cosine branch).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  /// Poisson draw. Exact multiplication method for small means, normal
  /// approximation (rounded, clamped at zero) for large ones.
  std::int64_t poisson(double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("poisson: mean must be >= 0");
    if (lambda == 0.0) return 0;
    if (lambda < 30.0) {
      const double limit = std::exp(-lambda);
      std::int64_t k = 0;
      double p = 1.0;
      do {
        ++k;
        p *= uniform();
      } while (p > limit);
      return k - 1;
    }
    double draw = lambda + std::sqrt(lambda) * normal();
    return draw <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(draw));
  }

 private:
  std::uint64_t state_;
};

}  // namespace pctof
