#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pafit {

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a of a byte string; used to turn model tags into seed material.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Stream-splitting rule for replications:
///   seed = mix64(mix64(mix64(mix64(base) ^ fnv1a64(tag)) ^ n) ^ r)
/// Stable across platforms and releases; changing it invalidates stored runs.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t n, std::uint64_t r) noexcept;

/// The library's only random source: std::mt19937_64 keyed by mix64(seed).
/// Conversions to doubles and bounded integers are done here (not through
/// <random> distributions, whose output is implementation-defined) so that a
/// seed reproduces the same stream bit-for-bit on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on {0, ..., bound-1}; Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pafit
