#pragma once

// Moments of walks Z = sum_x w(x) * D(x) [* 1{h(x) = 0}] whose +-1 steps D
// come from a 4-wise independent hash family, and the inequalities built
// on them:
//
//   sigma^2 = sum_x Var(xi(x))            (= sum w^2, or sum w^2 / T sliced)
//   m2 = sigma^2
//   sigma^4 <= m4 <= 3 sigma^4            (for +-w steps)
//   m1 >= m2^(3/2) / m4^(1/2) >= sigma / sqrt(3)
//   m1 <= sqrt(m2) = sigma
//   Pr[Z > theta E Z] >= (1 - theta)^2 (E Z)^2 / E Z^2   (Z >= 0)
//
// Exhaustive mode averages over every polynomial of a scaled-down family
// GF(2^b), so the moments are family averages rather than estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gf2.hpp"
#include "hashing.hpp"
#include "numeric.hpp"
#include "random.hpp"

namespace pe {

inline double first_moment_lower_bound(double m2, double m4) {
  if (!(m2 > 0.0) || !(m4 > 0.0)) throw ValidationError("moments must be positive");
  if (m4 < m2 * m2 * (1.0 - 1e-12)) throw ValidationError("moment ordering violated: m4 < m2^2");
  return std::pow(m2, 1.5) / std::sqrt(m4);
}

// For a non-negative variable with mean m1 and second moment m2.
inline double paley_zygmund_lower(double theta, double m1, double m2) {
  if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("theta must lie in (0, 1)");
  if (!(m2 > 0.0)) throw ValidationError("second moment must be positive");
  const double gap = 1.0 - theta;
  return gap * gap * m1 * m1 / m2;
}

inline constexpr double kAnticoncentrationFloor = 1.0 / 17.0;

enum class Independence { exhaustive_small_field, monte_carlo };

struct WalkSpec {
  std::vector<double> weights;
  Independence independence = Independence::monte_carlo;
  std::optional<std::uint64_t> slices;  // T; adds the 1{h(x) = 0} factor
  unsigned field_bits = 4;               // exhaustive mode only
  std::uint64_t trials = 10000;          // monte-carlo mode only
  std::uint64_t seed = 0;

  void validate() const {
    bool nonzero = false;
    for (double w : weights) {
      if (!std::isfinite(w)) throw ValidationError("walk weights must be finite");
      nonzero = nonzero || w != 0.0;
    }
    if (!nonzero) throw ValidationError("walk needs at least one nonzero weight");
    if (slices && !is_power_of_two(*slices)) throw ValidationError("slice count must be a power of 2");
  }

  [[nodiscard]] std::uint64_t slice_count() const noexcept { return slices.value_or(1); }
};

struct MzFlags {
  bool m1_lower = false;  // sigma / sqrt(3) <= m1
  bool m1_upper = false;  // m1 <= sigma
  bool m2_equal = false;  // m2 == sigma^2
  bool m4_lower = false;  // sigma^4 <= m4
  bool m4_upper = false;  // m4 <= 3 sigma^4

  [[nodiscard]] bool all() const noexcept { return m1_lower && m1_upper && m2_equal && m4_lower && m4_upper; }
};

struct MomentReport {
  double m1 = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  double sigma2 = 0.0;
  std::uint64_t samples = 0;
  bool exact = false;
  std::uint64_t slices = 1;
  // Standard errors of the estimates; zero in exhaustive mode.
  double se_m1 = 0.0;
  double se_m2 = 0.0;
  double se_m4 = 0.0;
  std::uint64_t tail_count = 0;  // samples with |Z| > sigma / 3
  MzFlags bounds_ok;

  [[nodiscard]] double sigma() const { return std::sqrt(sigma2); }
  [[nodiscard]] double tail_prob() const {
    return samples == 0 ? 0.0 : static_cast<double>(tail_count) / static_cast<double>(samples);
  }
};

namespace detail {

class MomentAccumulator {
 public:
  explicit MomentAccumulator(double tail_threshold) : tail_threshold_(tail_threshold) {}

  void add(double z) {
    const double a = std::fabs(z);
    const double z2 = z * z;
    const double z4 = z2 * z2;
    s1_ += a;
    s2_ += z2;
    s4_ += z4;
    q1_ += a * a;
    q2_ += z4;
    q4_ += z4 * z4;
    if (a > tail_threshold_) ++tail_;
    ++count_;
  }

  void finish(MomentReport& r, bool exact) const {
    const double n = static_cast<double>(count_);
    r.samples = count_;
    r.exact = exact;
    r.m1 = s1_.value() / n;
    r.m2 = s2_.value() / n;
    r.m4 = s4_.value() / n;
    r.tail_count = tail_;
    if (!exact && count_ > 1) {
      const auto se = [n](double mean, double mean_sq) {
        return std::sqrt(std::max(0.0, mean_sq - mean * mean) / (n - 1.0));
      };
      r.se_m1 = se(r.m1, q1_.value() / n);
      r.se_m2 = se(r.m2, q2_.value() / n);
      r.se_m4 = se(r.m4, q4_.value() / n);
    }
  }

 private:
  double tail_threshold_;
  CompensatedSum s1_, s2_, s4_, q1_, q2_, q4_;
  std::uint64_t tail_ = 0;
  std::uint64_t count_ = 0;
};

// Multiplication table for GF(2^b), b small.
class SmallFieldTable {
 public:
  explicit SmallFieldTable(const SmallBinaryField& f) : q_(f.size()), table_(std::size_t{q_} * q_) {
    for (std::uint32_t a = 0; a < q_; ++a)
      for (std::uint32_t b = 0; b < q_; ++b) table_[std::size_t{a} * q_ + b] = f.mul(a, b);
  }
  [[nodiscard]] std::uint32_t mul(std::uint32_t a, std::uint32_t b) const noexcept {
    return table_[std::size_t{a} * q_ + b];
  }
  // Values of c3 x^3 + c2 x^2 + c1 x + c0 at every field point.
  void evaluate_all(std::uint32_t c3, std::uint32_t c2, std::uint32_t c1, std::uint32_t c0,
                    std::vector<std::uint32_t>& out) const {
    out.resize(q_);
    for (std::uint32_t x = 0; x < q_; ++x) out[x] = mul(mul(mul(c3, x) ^ c2, x) ^ c1, x) ^ c0;
  }

 private:
  std::uint32_t q_;
  std::vector<std::uint32_t> table_;
};

inline void apply_bounds(MomentReport& r) {
  const double s2 = r.sigma2;
  const double s = std::sqrt(s2);
  const double s4 = s2 * s2;
  // Exhaustive results are held to 1e-9 relative; estimates get 4 standard errors.
  const double rel = 1e-9;
  const double t1 = r.exact ? rel * s : 4.0 * r.se_m1;
  const double t2 = r.exact ? rel * s2 : 4.0 * r.se_m2;
  const double t4 = r.exact ? rel * s4 : 4.0 * r.se_m4;
  r.bounds_ok.m1_lower = r.m1 >= s / std::sqrt(3.0) - t1;
  r.bounds_ok.m1_upper = r.m1 <= s + t1;
  r.bounds_ok.m2_equal = std::fabs(r.m2 - s2) <= t2;
  r.bounds_ok.m4_lower = r.m4 >= s4 - t4;
  r.bounds_ok.m4_upper = r.m4 <= 3.0 * s4 + t4;
}

}  // namespace detail

inline constexpr std::uint64_t kMaxExhaustiveFamilies = std::uint64_t{1} << 26;

inline double walk_variance(const WalkSpec& spec) {
  CompensatedSum s;
  for (double w : spec.weights) s += w * w;
  return s.value() / static_cast<double>(spec.slice_count());
}

inline MomentReport walk_moments(const WalkSpec& spec) {
  spec.validate();
  MomentReport r;
  r.slices = spec.slice_count();
  r.sigma2 = walk_variance(spec);
  detail::MomentAccumulator acc(std::sqrt(r.sigma2) / 3.0);
  const std::size_t m = spec.weights.size();

  if (spec.independence == Independence::exhaustive_small_field) {
    const SmallBinaryField field(spec.field_bits);
    if (m > field.size()) {
      throw UsageError("exhaustive mode needs one distinct field element per weight (m <= 2^b)");
    }
    const unsigned t = log2_exact(r.slices);
    if (t > spec.field_bits) throw UsageError("slice bits exceed the field width");
    const unsigned family_bits = (spec.slices ? 8 : 4) * spec.field_bits;
    if (spec.field_bits > kMaxEnumerableFieldBits || (std::uint64_t{1} << family_bits) > kMaxExhaustiveFamilies) {
      throw UsageError("family too large to enumerate; use a smaller field or monte-carlo mode");
    }
    const detail::SmallFieldTable table(field);
    const std::uint32_t q = field.size();
    const std::uint32_t slice_mask = (std::uint32_t{1} << t) - 1;

    // Signed step values per sign polynomial, then (optionally) per slicer.
    std::vector<std::uint32_t> sign_vals;
    std::vector<std::uint32_t> slice_vals;
    std::vector<double> steps(m);
    for (std::uint32_t a3 = 0; a3 < q; ++a3)
      for (std::uint32_t a2 = 0; a2 < q; ++a2)
        for (std::uint32_t a1 = 0; a1 < q; ++a1)
          for (std::uint32_t a0 = 0; a0 < q; ++a0) {
            table.evaluate_all(a3, a2, a1, a0, sign_vals);
            for (std::size_t x = 0; x < m; ++x) steps[x] = sign_vals[x] & 1 ? -spec.weights[x] : spec.weights[x];
            if (!spec.slices) {
              CompensatedSum z;
              for (double s : steps) z += s;
              acc.add(z.value());
              continue;
            }
            for (std::uint32_t b3 = 0; b3 < q; ++b3)
              for (std::uint32_t b2 = 0; b2 < q; ++b2)
                for (std::uint32_t b1 = 0; b1 < q; ++b1)
                  for (std::uint32_t b0 = 0; b0 < q; ++b0) {
                    table.evaluate_all(b3, b2, b1, b0, slice_vals);
                    CompensatedSum z;
                    for (std::size_t x = 0; x < m; ++x) {
                      if ((slice_vals[x] & slice_mask) == 0) z += steps[x];
                    }
                    acc.add(z.value());
                  }
          }
    acc.finish(r, true);
  } else {
    const unsigned t = log2_exact(r.slices);
    for (std::uint64_t i = 0; i < spec.trials; ++i) {
      Rng rng(derive_seed(spec.seed, i));
      const SignHash sign = sample_sign_hash(rng);
      const SliceHash slicer = sample_slice_hash(rng, t);
      CompensatedSum z;
      for (std::size_t x = 0; x < m; ++x) {
        if (spec.slices && slicer(x) != 0) continue;
        z += static_cast<double>(sign(x)) * spec.weights[x];
      }
      acc.add(z.value());
    }
    acc.finish(r, false);
  }
  detail::apply_bounds(r);
  return r;
}

struct AnticoncentrationResult {
  double tail_prob = 0.0;  // Pr[|Z| > sigma / 3]
  double wilson_lower = 0.0;
  std::uint64_t samples = 0;
  bool passed = false;  // wilson_lower >= 1/17 (exact mode: tail_prob > 1/17)
  MomentReport moments;
};

inline constexpr std::uint64_t kMinAnticoncentrationTrials = 1000;

inline AnticoncentrationResult anticoncentration_check(const WalkSpec& spec) {
  if (spec.independence == Independence::monte_carlo && spec.trials < kMinAnticoncentrationTrials) {
    throw UsageError("monte-carlo anticoncentration needs at least 1000 trials");
  }
  AnticoncentrationResult out;
  out.moments = walk_moments(spec);
  out.samples = out.moments.samples;
  out.tail_prob = out.moments.tail_prob();
  if (out.moments.exact) {
    out.wilson_lower = out.tail_prob;
    out.passed = out.tail_prob > kAnticoncentrationFloor;
  } else {
    out.wilson_lower = wilson_lower_bound(out.moments.tail_count, out.samples);
    out.passed = out.wilson_lower >= kAnticoncentrationFloor;
  }
  return out;
}

}  // namespace pe
