#pragma once

// Two-bin balls-and-bins with a 4-wise independent bin assignment.
//
// 2^k balls are hashed into bins {-1, +1} by a sign hash. The normalized
// maximum load max(c, N - c) / N sits above 1/2 by an amount that shrinks
// like 2^(-k/2), so a set with fewer balls shows a larger excess.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "errors.hpp"
#include "hashing.hpp"
#include "numeric.hpp"
#include "random.hpp"

namespace pe {

inline constexpr unsigned kMaxBallBits = 26;

// 0.5 + sqrt(2 / pi) * 2^(-k/2), the heuristic prediction being tested.
inline double predicted_average_max_load(unsigned k) {
  return 0.5 + std::sqrt(2.0 / std::numbers::pi) * std::exp2(-static_cast<double>(k) / 2.0);
}

struct BallsBinsResult {
  unsigned k = 0;  // log2 of the ball count
  std::uint64_t trials = 0;
  double average_max_load = 0.0;
  double predicted = 0.0;

  [[nodiscard]] double offset() const noexcept { return average_max_load - 0.5; }
  [[nodiscard]] double predicted_offset() const noexcept { return predicted - 0.5; }
  [[nodiscard]] double offset_relative_error() const noexcept {
    return std::fabs(offset() - predicted_offset()) / predicted_offset();
  }
};

// Normalized max load of the balls first, first + 1, ..., first + count - 1.
inline double max_load(const SignHash& bins, std::uint64_t first, std::uint64_t count) {
  std::uint64_t plus = 0;
  for (std::uint64_t x = first; x < first + count; ++x) plus += bins(x) == 1 ? 1 : 0;
  return static_cast<double>(std::max(plus, count - plus)) / static_cast<double>(count);
}

struct BallsBinsComparison {
  BallsBinsResult x;  // 2^k balls
  BallsBinsResult y;  // 2^k' balls
  double gap = 0.0;   // x.average_max_load - y.average_max_load
};

// Each trial samples one bin assignment and throws both ball sets with it;
// the two sets are disjoint ranges of points.
inline BallsBinsComparison balls_bins(unsigned k, unsigned k_prime, std::uint64_t trials, std::uint64_t seed) {
  if (k_prime > kMaxBallBits) throw UsageError("k' must be at most 26");
  if (k > k_prime) throw UsageError("need k <= k'");
  if (trials == 0) throw UsageError("need at least one trial");
  const std::uint64_t nx = std::uint64_t{1} << k;
  const std::uint64_t ny = std::uint64_t{1} << k_prime;
  CompensatedSum load_x;
  CompensatedSum load_y;
  for (std::uint64_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, i));
    const SignHash bins = sample_sign_hash(rng);
    load_x += max_load(bins, 0, nx);
    load_y += max_load(bins, nx, ny);
  }
  BallsBinsComparison out;
  const double n = static_cast<double>(trials);
  out.x = {k, trials, load_x.value() / n, predicted_average_max_load(k)};
  out.y = {k_prime, trials, load_y.value() / n, predicted_average_max_load(k_prime)};
  out.gap = out.x.average_max_load - out.y.average_max_load;
  return out;
}

inline BallsBinsResult average_max_load(unsigned k, std::uint64_t trials, std::uint64_t seed) {
  return balls_bins(k, k, trials, seed).x;
}

}  // namespace pe
