#pragma once

// Degree-3 polynomial hashing over binary fields.
//
//   h(x) = c3*x^3 + c2*x^2 + c1*x + c0
//
// For any four distinct inputs the outputs are jointly uniform over the
// choice of (c3, c2, c1, c0), i.e. the family is 4-wise independent. Since
// the field has characteristic 2, any fixed subset of output bits is exactly
// uniform too, so taking bit 0 (sign) or the low t bits (slice) introduces
// no bias.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gf2.hpp"
#include "random.hpp"

namespace pe {

template <typename Field>
class PolynomialHash {
 public:
  using value_type = typename Field::value_type;

  constexpr PolynomialHash(Field field, value_type c3, value_type c2, value_type c1, value_type c0)
      : field_(field), coeffs_{c3, c2, c1, c0} {}

  constexpr value_type operator()(value_type x) const noexcept {
    value_type acc = coeffs_[0];
    for (std::size_t i = 1; i < coeffs_.size(); ++i) acc = field_.add(field_.mul(acc, x), coeffs_[i]);
    return acc;
  }

  [[nodiscard]] constexpr value_type c3() const noexcept { return coeffs_[0]; }
  [[nodiscard]] constexpr value_type c2() const noexcept { return coeffs_[1]; }
  [[nodiscard]] constexpr value_type c1() const noexcept { return coeffs_[2]; }
  [[nodiscard]] constexpr value_type c0() const noexcept { return coeffs_[3]; }
  [[nodiscard]] constexpr const Field& field() const noexcept { return field_; }

  friend constexpr bool operator==(const PolynomialHash& a, const PolynomialHash& b) noexcept {
    return a.coeffs_ == b.coeffs_;
  }

 private:
  Field field_;
  std::array<value_type, 4> coeffs_;  // c3, c2, c1, c0
};

using PolyHash = PolynomialHash<Gf2_64>;
using SmallPolyHash = PolynomialHash<SmallBinaryField>;

inline constexpr PolyHash make_polyhash(std::uint64_t c3, std::uint64_t c2, std::uint64_t c1,
                                        std::uint64_t c0) noexcept {
  return PolyHash(Gf2_64{}, c3, c2, c1, c0);
}

// Draws c3, c2, c1, c0 in that order, one 64-bit output each.
inline PolyHash sample_polyhash(Rng& rng) {
  const std::uint64_t c3 = rng();
  const std::uint64_t c2 = rng();
  const std::uint64_t c1 = rng();
  const std::uint64_t c0 = rng();
  return make_polyhash(c3, c2, c1, c0);
}

// 0 -> +1, 1 -> -1.
inline constexpr int sign_of_bit(std::uint64_t bit) noexcept { return bit & 1 ? -1 : 1; }

class SignHash {
 public:
  constexpr SignHash() noexcept : base_(make_polyhash(0, 0, 0, 0)) {}
  explicit constexpr SignHash(PolyHash base) noexcept : base_(base) {}

  int operator()(std::uint64_t x) const noexcept { return sign_of_bit(base_(x)); }
  [[nodiscard]] constexpr const PolyHash& base() const noexcept { return base_; }

 private:
  PolyHash base_;
};

inline constexpr unsigned kMaxSliceBits = 32;

// Slice index in [0, 2^t): the low t bits of the field value.
class SliceHash {
 public:
  constexpr SliceHash() noexcept : base_(make_polyhash(0, 0, 0, 0)) {}
  SliceHash(PolyHash base, unsigned t) : base_(base), t_(t) {
    if (t > kMaxSliceBits) throw RangeError("slice bit count must be at most 32");
  }

  std::uint64_t operator()(std::uint64_t x) const noexcept {
    if (t_ == 0) return 0;
    return base_(x) & ((std::uint64_t{1} << t_) - 1);
  }
  [[nodiscard]] constexpr unsigned bits() const noexcept { return t_; }
  [[nodiscard]] constexpr std::uint64_t slice_count() const noexcept { return std::uint64_t{1} << t_; }
  [[nodiscard]] constexpr const PolyHash& base() const noexcept { return base_; }

 private:
  PolyHash base_;
  unsigned t_ = 0;
};

inline SignHash sample_sign_hash(Rng& rng) { return SignHash(sample_polyhash(rng)); }
inline SliceHash sample_slice_hash(Rng& rng, unsigned t) { return SliceHash(sample_polyhash(rng), t); }

// ---------------------------------------------------------------------------
// Exhaustive instrument over a scaled-down family.

inline constexpr unsigned kMaxEnumerableFieldBits = 6;

// Calls f(hash) for every one of the 2^(4b) degree-3 polynomials over GF(2^b).
template <typename F>
void for_each_small_polyhash(const SmallBinaryField& field, F&& f) {
  const std::uint32_t q = field.size();
  for (std::uint32_t c3 = 0; c3 < q; ++c3)
    for (std::uint32_t c2 = 0; c2 < q; ++c2)
      for (std::uint32_t c1 = 0; c1 < q; ++c1)
        for (std::uint32_t c0 = 0; c0 < q; ++c0) f(SmallPolyHash(field, c3, c2, c1, c0));
}

struct KwiseReport {
  unsigned field_bits = 0;
  std::vector<std::uint32_t> points;
  std::uint64_t family_size = 0;
  // Joint output tuple (v_0, ..., v_{m-1}) is bucket sum_i v_i * 2^(b*i).
  std::vector<std::uint64_t> histogram;
  std::uint64_t expected_count = 0;
  std::uint64_t min_count = 0;
  std::uint64_t max_count = 0;

  [[nodiscard]] bool exactly_uniform() const noexcept {
    return min_count == expected_count && max_count == expected_count;
  }
};

inline KwiseReport kwise_uniformity_report(unsigned field_bits, const std::vector<std::uint32_t>& points) {
  if (field_bits < 1 || field_bits > kMaxEnumerableFieldBits) {
    throw UsageError("exhaustive enumeration supports field widths 1.." +
                     std::to_string(kMaxEnumerableFieldBits) + " (2^(4b) coefficient tuples)");
  }
  if (points.empty() || points.size() > 4) throw UsageError("need between 1 and 4 evaluation points");
  const SmallBinaryField field(field_bits);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] >= field.size()) throw UsageError("evaluation point outside the field");
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) throw UsageError("evaluation points must be distinct");
    }
  }

  KwiseReport report;
  report.field_bits = field_bits;
  report.points = points;
  report.family_size = std::uint64_t{1} << (4 * field_bits);
  const std::uint64_t buckets = std::uint64_t{1} << (field_bits * points.size());
  report.histogram.assign(buckets, 0);
  report.expected_count = report.family_size / buckets;

  for_each_small_polyhash(field, [&](const SmallPolyHash& h) {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      key |= std::uint64_t{h(points[i])} << (field_bits * i);
    }
    ++report.histogram[key];
  });

  report.min_count = report.histogram[0];
  report.max_count = report.histogram[0];
  for (std::uint64_t c : report.histogram) {
    report.min_count = std::min(report.min_count, c);
    report.max_count = std::max(report.max_count, c);
  }
  return report;
}

}  // namespace pe
