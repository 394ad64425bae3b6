#pragma once

#include <cstdint>

namespace sbatch {

// SplitMix64 stream. The generator is pinned so that instance files
// reproduce byte-for-byte from a seed across platforms and languages:
//   next():  z = (state += 0x9E3779B97F4A7C15)
//            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//            return z ^ (z >> 31)
//   below(n): next() % n
//   unit():   (next() >> 11) * 2^-53
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Derives an independent stream, e.g. one per generated instance.
  static Rng stream(std::uint64_t seed, std::uint64_t id) {
    Rng mix(seed ^ (0xD1B54A32D192ED03ULL * (id + 1)));
    mix.next();
    return Rng(mix.next());
  }
};

}  // namespace sbatch
