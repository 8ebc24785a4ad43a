#pragma once

#include <array>
#include <cstdint>

namespace ergotorus {

/// Philox4x32-10 (Salmon et al., SC'11). Pure function of counter and key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Separates the streams used by different consumers of the same seed.
enum class RngPurpose : std::uint16_t {
  kWalk = 1,
  kStartVector = 2,
  kSample = 3,
  kHolderPairs = 4,
  kControl = 5,
  kDictionary = 6,
};

/// Random stream addressed by (seed, purpose, trial, index). Any draw can be
/// computed independently of every other, so results never depend on the
/// order or the thread in which they are requested.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, RngPurpose purpose, std::uint64_t trial) noexcept;

  /// 64 uniform bits for draw number `index`.
  std::uint64_t bits(std::uint64_t index) const noexcept;
  /// Draws 2·block and 2·block+1 from a single Philox call.
  std::array<std::uint64_t, 2> pair(std::uint64_t block) const noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t index) const noexcept {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }
  /// Standard normal via Box-Muller on draws 2·index and 2·index+1.
  double normal(std::uint64_t index) const noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t trial_lo_;
  std::uint32_t trial_hi_;
};

}  // namespace ergotorus
