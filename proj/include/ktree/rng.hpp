#pragma once

#include <cstdint>

namespace ktree {

// Counter-based generator (splitmix64 stream). The (seed, counter) pair fully
// determines the output sequence, so runs are reproducible across platforms;
// std::uniform_int_distribution is implementation-defined and never used here.
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed = 0) : seed_(seed), counter_(0) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), bias-free via rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = u64();
    } while (x >= limit);
    return x % n;
  }

  // Independent child stream, e.g. one per experiment replicate.
  RngHandle derived(std::uint64_t index) const {
    std::uint64_t z = seed_ ^ (0xD1B54A32D192ED03ULL + index * 0x8CB92BA72F3D8DD7ULL);
    z = (z ^ (z >> 29)) * 0xFF51AFD7ED558CCDULL;
    z = (z ^ (z >> 32)) * 0xC4CEB9FE1A85EC53ULL;
    return RngHandle(z ^ (z >> 29));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace ktree
