#pragma once

// Seeded randomness shared by every generator in the library.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++
// standard. The distributions in <random> are not, so uniforms and
// normals are derived here explicitly:
//   uniform  = top 53 bits of one engine draw, scaled to [0, 1)
//   normal   = Box-Muller on two uniforms; both outputs are used, the
//              second one is cached for the next call
// This keeps every ensemble, dither and row choice bit-reproducible
// across standard libraries.

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace onebit {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of an independent sub-stream `stream` of a parent seed.
constexpr std::uint64_t stream_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
  return mix64(parent ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

// Per-trial seed: mix64(mix64(mix64(master) ^ bits(lambda)) ^ trial).
inline std::uint64_t derive_trial_seed(std::uint64_t master, double lambda,
                                       std::uint64_t trial) noexcept {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ std::bit_cast<std::uint64_t>(lambda));
  return mix64(h ^ trial);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound), bound > 0. Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const unsigned __int128 product =
          static_cast<unsigned __int128>(engine_()) * bound;
      if (static_cast<std::uint64_t>(product) >= threshold) {
        return static_cast<std::uint64_t>(product >> 64);
      }
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace onebit
