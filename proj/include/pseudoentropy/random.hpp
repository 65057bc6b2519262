#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace pe {

// std::mt19937_64 is fully specified by the standard, so streams are
// reproducible across standard libraries. The distribution adaptors in
// <random> are not, which is why bounded draws are done by hand below.
using Rng = std::mt19937_64;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based child seed: the i-th trial of a run seeded with `root`
// always gets the same seed, independent of scheduling.
inline constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter) noexcept {
  return mix64(root + 0x9e3779b97f4a7c15ULL * (counter + 1));
}

// Uniform integer in [0, bound). Rejection sampling, bound > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::uint64_t(-bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= limit) return r % bound;
  }
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace pe
