#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace expeval {

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives a stream seed from (seed, tag, index). Streams for distinct tags
/// or indices are independent, so per-query work can run in any order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a(tag)) ^ index);
}

inline Rng make_rng(std::uint64_t seed, std::string_view tag,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(seed, tag, index));
}

/// Uniform double in the open interval (0, 1).
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

/// Standard Gumbel draw, -ln(-ln u).
inline double gumbel(Rng& rng) { return -std::log(-std::log(uniform01(rng))); }

/// Standard normal via Box-Muller.
inline double normal01(Rng& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

/// Unbiased uniform integer in [0, n) by rejection.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

/// Geometric draw with pmf P(k) = beta * (1-beta)^k, k >= 0.
inline std::uint64_t geometric(Rng& rng, double beta) {
  if (beta >= 1.0) return 0;
  return static_cast<std::uint64_t>(
      std::floor(std::log(uniform01(rng)) / std::log1p(-beta)));
}

/// In-place Fisher-Yates shuffle of [first, last).
template <typename It>
void fisher_yates(It first, It last, Rng& rng) {
  const auto n = static_cast<std::size_t>(last - first);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(first[i - 1], first[uniform_index(rng, i)]);
  }
}

}  // namespace expeval
