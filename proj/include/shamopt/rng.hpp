#pragma once

#include <cmath>
#include <cstdint>

namespace shamopt {

// splitmix64 step; used for seeding and substream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Seedable, splittable generator (xoshiro256** core, splitmix64 seeding).
/// Substreams are derived from the (seed, stream) pair by counter mixing,
/// never from generator state, so fan-out is deterministic for a fixed seed
/// regardless of draw order in other streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::uint64_t sm = seed ^ (0x6c62272e07bb0142ull * (stream + 1));
    for (auto& w : s_) w = splitmix64(sm);
  }

  /// Derived child stream; independent of how much this stream has drawn.
  Rng split(std::uint64_t child) const {
    std::uint64_t sm = stream_ ^ (0x9e3779b97f4a7c15ull * (child + 1));
    return Rng(seed_, splitmix64(sm));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

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

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (the second draw is discarded).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Bernoulli draw against probability prob.
  bool bernoulli(double prob) { return uniform() < prob; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t s_[4];
};

}  // namespace shamopt
