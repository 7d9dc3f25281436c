// Counter-based deterministic random numbers.
//
// Every draw is a pure function of a key tuple, so results do not depend on
// call order or on how work is split across threads.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace tokcomp::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, used to turn string identifiers into stream keys.
inline constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stream tags keep unrelated draws from sharing a key.
enum class Stream : std::uint64_t {
  kTopic = 1,
  kDocLength = 2,
  kDocTopics = 3,
  kTokenTopic = 4,
  kTokenNoise = 5,
  kRedundancy = 6,
  kCopySource = 7,
  kCritical = 8,
  kVisual = 9,
  kInjectNoise = 10,
  kTrainer = 11,
};

/// A keyed generator: value(counter) is a pure function of (key, counter).
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                       std::uint64_t b = 0)
      : key_(splitmix64(splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))) ^ a) ^ b)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
  }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound).
  constexpr std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const {
    return static_cast<std::uint64_t>(uniform(counter) * static_cast<double>(bound));
  }

  /// Standard normal via Box-Muller on counters (2c, 2c+1).
  double gaussian(std::uint64_t counter) const {
    const double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace tokcomp::rng
