#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "riszf/types.hpp"

namespace riszf {

// Counter-based substream derivation: hashing (master, stream, salt)
// through SplitMix64 yields independent, reproducible seeds, so trials
// can run on any number of workers without coordination.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t salt = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ salt);
}

// Deterministic random source.  Gaussians use an explicit Box-Muller
// transform instead of std::normal_distribution, whose algorithm is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  Rng(std::uint64_t master, std::uint64_t stream, std::uint64_t salt = 0)
      : eng_(substream_seed(master, stream, salt)) {}

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Standard normal.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Circularly-symmetric complex Gaussian with the given total variance.
  Complex cnormal(double variance) {
    const double s = std::sqrt(0.5 * variance);
    return {s * normal(), s * normal()};
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace riszf
