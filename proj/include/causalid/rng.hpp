#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace causalid {

/// SplitMix64. Chosen over <random> engines and distributions because the
/// standard distributions are implementation-defined; every draw here is
/// specified bit for bit, so fixtures reproduce across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard exponential by inversion; 1 - u lies in (0, 1].
  double exponential() noexcept { return -std::log1p(-uniform()); }

 private:
  std::uint64_t state_;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Independent stream for one (seed, key) pair, e.g. one variable's CPT.
inline SplitMix64 substream(std::uint64_t seed, std::string_view key) noexcept {
  SplitMix64 mix(seed ^ fnv1a(key));
  return SplitMix64(mix.next());
}

}  // namespace causalid
