#pragma once

#include <cstdint>
#include <random>

namespace pchaz {

/// SplitMix64 finalizer. Used to derive well-separated seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the `index`-th independent substream of `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// Seeded random source with platform-independent output.
///
/// Engine is std::mt19937_64, whose raw sequence is fixed by the standard.
/// Variates are derived here rather than through <random> distributions,
/// whose algorithms are implementation-defined:
///   uniform      (k + 0.5) / 2^53 with k the top 53 bits, so in (0, 1)
///   normal       Marsaglia polar method, second variate cached
///   exponential  -log(uniform) / rate
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double exponential(double rate = 1.0);
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace pchaz
