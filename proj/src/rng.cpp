#include "ergotorus/rng.hpp"

#include <cmath>
#include <numbers>

namespace ergotorus {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, RngPurpose purpose,
                             std::uint64_t trial) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      trial_lo_(static_cast<std::uint32_t>(trial)),
      trial_hi_((static_cast<std::uint32_t>(trial >> 32) & 0xffffu) |
                (static_cast<std::uint32_t>(purpose) << 16)) {}

std::array<std::uint64_t, 2> CounterStream::pair(std::uint64_t block) const noexcept {
  auto r = philox4x32({static_cast<std::uint32_t>(block),
                       static_cast<std::uint32_t>(block >> 32), trial_lo_, trial_hi_},
                      key_);
  return {(static_cast<std::uint64_t>(r[1]) << 32) | r[0],
          (static_cast<std::uint64_t>(r[3]) << 32) | r[2]};
}

std::uint64_t CounterStream::bits(std::uint64_t index) const noexcept {
  return pair(index >> 1)[index & 1];
}

double CounterStream::normal(std::uint64_t index) const noexcept {
  double u1 = 1.0 - uniform(2 * index);  // (0, 1]
  double u2 = uniform(2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ergotorus
