#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace fhcs {

/// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of substream `stream` of `seed`. Used for per-trial and per-band
/// streams: derive_seed(derive_seed(base, trial), band).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Portable deterministic generator. Only the engine comes from <random>;
/// the distributions are implemented here so streams are identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound); bound > 0.
  std::size_t below(std::size_t bound);
  /// Standard normal (Box-Muller, one draw per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// m distinct indices of {0, ..., n-1}, uniformly at random, via a partial
/// Fisher-Yates shuffle; returned in draw order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t m);

}  // namespace fhcs
