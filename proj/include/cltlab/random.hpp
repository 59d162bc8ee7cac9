#pragma once

// Counter-based random streams.
//
// Every variate is a pure function of (key, j, slot), where the key is derived
// from the experiment seed and the replication number. There is no generator
// state to share, so a replication can be evaluated on any worker and in any
// order without changing its output.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace cltlab::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Derives an independent child seed; used for replication, point and
/// sub-sampling seeds alike.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(mix64(seed + kGolden) ^ mix64(tag * kGolden + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag_a,
                               std::uint64_t tag_b) noexcept {
  return derive(derive(seed, tag_a), tag_b);
}

/// Number of 64-bit draws reserved per index j.
inline constexpr std::uint64_t kSlotsPerIndex = 4;

/// A keyed, random-access stream. Draw (j, slot) is
/// mix64(key + (j * kSlotsPerIndex + slot + 1) * golden), i.e. the SplitMix64
/// sequence started at `key`.
class Stream {
 public:
  constexpr explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t j, std::uint64_t slot) const noexcept {
    return mix64(key_ + (j * kSlotsPerIndex + slot + 1) * kGolden);
  }

  /// Uniform on [0, 1).
  [[nodiscard]] double uniform(std::uint64_t j, std::uint64_t slot) const noexcept {
    return static_cast<double>(bits(j, slot) >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a logarithm argument.
  [[nodiscard]] double uniform_open0(std::uint64_t j, std::uint64_t slot) const noexcept {
    return static_cast<double>((bits(j, slot) >> 11) + 1) * 0x1.0p-53;
  }

  /// Two independent standard normals from slots (slot, slot + 1), Box-Muller.
  [[nodiscard]] std::pair<double, double> normal_pair(std::uint64_t j,
                                                      std::uint64_t slot) const noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0(j, slot)));
    const double angle = 2.0 * std::numbers::pi * uniform(j, slot + 1);
    return {r * std::cos(angle), r * std::sin(angle)};
  }

  [[nodiscard]] double normal(std::uint64_t j, std::uint64_t slot) const noexcept {
    return normal_pair(j, slot).first;
  }

  /// +1 or -1 with equal probability.
  [[nodiscard]] double sign(std::uint64_t j, std::uint64_t slot) const noexcept {
    return (bits(j, slot) >> 63) != 0 ? 1.0 : -1.0;
  }

 private:
  std::uint64_t key_;
};

}  // namespace cltlab::rng
