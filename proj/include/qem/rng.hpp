#pragma once

#include <cstdint>
#include <random>

namespace qem {

// splitmix64 finalizer; used for seed derivation so results do not depend on
// the platform's std::seed_seq.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-circuit seeds come from (master, counter) so that batch splitting and
// evaluation order cannot change results.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  return mix64(master ^ mix64(counter + 1));
}

// mt19937_64 with hand-rolled distributions. std::uniform_real_distribution
// and friends are implementation-defined, which would break bit-reproducible
// outputs across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  bool next_bool() { return (engine_() >> 63) != 0; }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qem
