#pragma once

// Counter-based random streams. Every consumer derives its own stream from
// (seed, tag, index...) so that independence between blocks / paths / stages
// is structural rather than an artifact of draw ordering, and results are
// reproducible across platforms (no std::*_distribution involved).

#include <array>
#include <cmath>
#include <cstdint>

namespace nchan::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Mixes an arbitrary key sequence into one 64-bit value.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                         std::uint64_t d = 0) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s);
  s ^= b + 0x9E3779B97F4A7C15ull;
  h ^= splitmix64(s);
  s ^= c + 0xD1B54A32D192ED03ull;
  h ^= splitmix64(s);
  s ^= d + 0x8CB92BA72F3D8DD7ull;
  h ^= splitmix64(s);
  return h;
}

// Maps a signed index (block numbers can be negative) to a unique u64.
inline std::uint64_t zigzag(long long i) {
  return (static_cast<std::uint64_t>(i) << 1) ^ static_cast<std::uint64_t>(i >> 63);
}

// xoshiro256++ with splitmix-expanded seeding.
class Stream {
 public:
  explicit Stream(std::uint64_t key) {
    std::uint64_t s = key;
    for (auto& w : s_) w = splitmix64(s);
  }
  static Stream derived(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0,
                        std::uint64_t b = 0) {
    return Stream(mix(seed, tag, a, b));
  }

  std::uint64_t next() {
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

  // Uniform on [0,1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the polar method; second deviate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream tags; one per independent consumer of the master seed.
enum Tag : std::uint64_t {
  kPhase = 1,
  kBlockWidth = 2,
  kBlockWing = 3,
  kPath = 4,
  kBootstrap = 5,
  kShape = 6,
  kMoment = 7,
  kEnsemble = 8,
};

}  // namespace nchan::rng
