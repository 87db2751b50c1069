#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams. Every draw is a pure function of
// (seed, key, counter), so parallel generation is deterministic and
// independent of evaluation order and thread count.

namespace slat::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer (bijective mixing of a 64-bit word)
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derive a substream base from a master seed and a 64-bit key.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t key) noexcept {
  const std::uint64_t s = mix64(seed + kGolden);
  return mix64(s ^ mix64(key + kGolden));
}

class Stream {
 public:
  explicit constexpr Stream(std::uint64_t base) noexcept : base_(base) {}

  static constexpr Stream keyed(std::uint64_t seed, std::uint64_t key) noexcept {
    return Stream(substream(seed, key));
  }

  // i-th output equals splitmix64 started at base_, so the sequence
  // inherits splitmix64's statistical quality.
  constexpr std::uint64_t next_u64() noexcept {
    counter_ += 1;
    return mix64(base_ + counter_ * kGolden);
  }

  // strictly inside (0,1); safe as an argument to log and tan
  double next_uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  double next_exponential() noexcept { return -std::log(next_uniform()); }

  // Box-Muller; consumes two uniforms per draw
  double next_gaussian() noexcept {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t base_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace slat::rng
