#pragma once

#include <cstdint>

namespace fplap {

// splitmix64. Used instead of <random> so that streams are identical across
// standard library implementations; every experiment seed is reproducible.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // uniform integer in [0, m)
  long index(long m) { return static_cast<long>(next() % static_cast<std::uint64_t>(m)); }
};

}  // namespace fplap
