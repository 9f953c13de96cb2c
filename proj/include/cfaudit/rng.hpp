#pragma once

#include <cstdint>

namespace cfaudit {

// Deterministic, compiler-independent RNG. std::mt19937's engine is portable
// but the standard distributions are not, so all sampling goes through the
// helpers below. Substreams are derived by hashing (seed, counters), which
// lets parallel workers reproduce the serial stream assignment exactly.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  // xoshiro256++
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

  // Unbiased integer in [0, bound) via Lemire's method.
  std::uint64_t bounded(std::uint64_t bound) {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      std::uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Stable substream derivation: independent-looking seeds from a master seed
// and up to three counters (stage, item, attempt).
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t st = seed;
  std::uint64_t h = splitmix64(st);
  st = h ^ (a + 0x9e3779b97f4a7c15ULL);
  h = splitmix64(st);
  st = h ^ (b + 0xd1b54a32d192ed03ULL);
  h = splitmix64(st);
  st = h ^ (c + 0x8bb84b93962eacc9ULL);
  return splitmix64(st);
}

}  // namespace cfaudit
