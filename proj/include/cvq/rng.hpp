#pragma once

#include <cstdint>
#include <limits>

namespace cvq {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based substream: the n-th draw of stream (seed, key) depends only on
/// (seed, key, n), so streams can be consumed in any order or in parallel.
/// Satisfies UniformRandomBitGenerator for use with <random> distributions.
class Substream {
 public:
  using result_type = std::uint64_t;

  Substream(std::uint64_t seed, std::uint64_t key) : base_(mix64(mix64(seed) ^ (key * 0xd1b54a32d192ed03ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix64(base_ + 0x632be59bd9b4e019ULL * counter_++); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Substream& s) { return static_cast<double>(s() >> 11) * 0x1.0p-53; }

}  // namespace cvq
