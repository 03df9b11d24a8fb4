#pragma once

// Counter-based random draws: every value is a pure function of a key
// (seed, instance id, ordering, repetition, stream) so results do not depend on
// call order or thread interleaving.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace swapjudge::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

// Uniform in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct CounterKey {
  std::uint64_t seed = 0;
  std::string_view id;
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  constexpr std::uint64_t hash(std::uint64_t stream) const {
    std::uint64_t h = splitmix64(seed);
    h = combine(h, fnv1a64(id));
    h = combine(h, a);
    h = combine(h, b);
    return combine(h, stream);
  }

  constexpr double uniform(std::uint64_t stream) const { return to_unit(hash(stream)); }

  // Standard normal via Box-Muller over two independent streams.
  double normal(std::uint64_t stream) const {
    const double u1 = 1.0 - uniform(2 * stream);  // (0, 1]
    const double u2 = uniform(2 * stream + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

}  // namespace swapjudge::rng
