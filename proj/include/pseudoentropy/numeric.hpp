#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace pe {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  constexpr void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  constexpr CompensatedSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }
  [[nodiscard]] constexpr double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum s;
  for (double v : values) s += v;
  return s.value();
}

inline constexpr double kWilsonZ95 = 1.959963984540054;

// Lower end of the Wilson score interval for a binomial proportion.
inline double wilson_lower_bound(std::uint64_t successes, std::uint64_t trials,
                                 double z = kWilsonZ95) noexcept {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = p + z2 / (2.0 * n);
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  const double lower = (centre - spread) / (1.0 + z2 / n);
  return lower < 0.0 ? 0.0 : lower;
}

inline double wilson_upper_bound(std::uint64_t successes, std::uint64_t trials,
                                 double z = kWilsonZ95) noexcept {
  if (trials == 0) return 1.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = p + z2 / (2.0 * n);
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  const double upper = (centre + spread) / (1.0 + z2 / n);
  return upper > 1.0 ? 1.0 : upper;
}

inline constexpr bool is_power_of_two(std::uint64_t v) noexcept {
  return v != 0 && (v & (v - 1)) == 0;
}

inline constexpr unsigned log2_exact(std::uint64_t pow2) noexcept {
  unsigned t = 0;
  while ((std::uint64_t{1} << t) < pow2) ++t;
  return t;
}

}  // namespace pe
