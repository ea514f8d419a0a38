#pragma once

#include <cstdint>
#include <random>

namespace lossy {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seedable, splittable generator ("mt19937_64 seeded via splitmix64").
// split() derives a child whose stream does not depend on how much the
// parent is consumed afterwards, so sharded work merges deterministically.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : seed_(seed), split_state_(seed) {
    std::uint64_t s = seed;
    engine_.seed(splitmix64(s));
  }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  SplitRng split() { return SplitRng(splitmix64(split_state_)); }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  // Inclusive bounds.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t split_state_;
  std::mt19937_64 engine_;
};

}  // namespace lossy
