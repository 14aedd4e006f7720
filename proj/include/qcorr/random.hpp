#pragma once

// Portable random streams.
//
// Every draw used by the library is a pure function of (key, counter), so
// results do not depend on the standard library's distribution
// implementations or on the order in which workers run.
//
//   splitmix64(x)          SplitMix64 finalizer (Steele, Lea, Flood 2014)
//   uniform(key, i)        53-bit double in (0, 1) from the i-th SplitMix64
//                          output of a stream whose state starts at key
//   normal(key, i)         Box-Muller cosine branch on uniforms 2i and 2i+1
//
// Sequential consumers (particle walkers) use SequentialStream, which wraps
// the same counter scheme with an internal cursor.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qcorr::random {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combines a parent key with a child index into a new independent key.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t child) noexcept {
  return splitmix64(splitmix64(parent) ^ (child * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

constexpr std::uint64_t bits(std::uint64_t key, std::uint64_t counter) noexcept {
  return splitmix64(key + counter * kGolden);
}

/// Uniform double strictly inside (0, 1).
inline double uniform(std::uint64_t key, std::uint64_t counter) noexcept {
  return (static_cast<double>(bits(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

inline double normal(std::uint64_t key, std::uint64_t counter) noexcept {
  const double u1 = uniform(key, 2 * counter);
  const double u2 = uniform(key, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

class SequentialStream {
 public:
  explicit SequentialStream(std::uint64_t key) noexcept : key_(key) {}

  double uniform() noexcept { return random::uniform(key_, counter_++); }

  /// Box-Muller, both branches used.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    const auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qcorr::random
