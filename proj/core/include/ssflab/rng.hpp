#pragma once

#include <cstdint>
#include <limits>

namespace ssflab {

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Identifies an independent random stream. Streams with different keys never
/// share state, so realizations can be generated in any order or in parallel.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t realization = 0;
  std::uint64_t component = 0;
};

/// Counter-based generator: the n-th output is a pure function of (key, n).
///
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions,
/// although the library samplers below only use uniform01().
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(const StreamKey& key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Output at an arbitrary counter position without advancing.
  result_type at(std::uint64_t counter) const noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ssflab
