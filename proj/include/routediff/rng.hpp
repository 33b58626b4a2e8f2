#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace routediff {

// Deterministic random source. All stochastic code in the project draws from
// an explicitly seeded Rng so that every artifact is reproducible bit-for-bit.
// Gaussian draws use Box-Muller instead of std::normal_distribution, whose
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derives an independent stream from (seed, a, b, c) via splitmix64 mixing.
  // Streams with distinct inputs are decorrelated; used for per-sample and
  // per-chain noise so parallel order never changes results.
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                    std::uint64_t c = 0);

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int lo, int hi);       // inclusive, rejection-sampled
  double normal();                       // standard normal

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer; also used for config hashing.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over raw bytes; stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace routediff
