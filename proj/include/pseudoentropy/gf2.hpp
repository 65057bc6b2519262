#pragma once

// Binary-field arithmetic for the polynomial hash families.
//
// GF(2^64) is GF(2)[x] / (x^64 + x^4 + x^3 + x + 1). Elements are 64-bit
// words, bit i holding the coefficient of x^i. Addition is XOR.
//
// SmallBinaryField covers GF(2^b) for b <= 16; it exists so that whole hash
// families can be enumerated in tests and exact-moment computations.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
#include <immintrin.h>
#define PE_HAVE_X86_CLMUL 1
#endif

namespace pe {

namespace detail {

struct U128 {
  std::uint64_t lo;
  std::uint64_t hi;
};

// Carry-less 64x64 -> 128 multiply, 4-bit windows.
inline constexpr U128 clmul_portable(std::uint64_t a, std::uint64_t b) noexcept {
  std::array<unsigned __int128, 16> table{};
  const unsigned __int128 wide = a;
  for (unsigned j = 1; j < 16; ++j) {
    unsigned __int128 v = 0;
    for (unsigned bit = 0; bit < 4; ++bit) {
      if (j & (1u << bit)) v ^= wide << bit;
    }
    table[j] = v;
  }
  unsigned __int128 r = 0;
  for (int shift = 60; shift >= 0; shift -= 4) {
    r ^= table[(b >> shift) & 0xF] << shift;
  }
  return {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(r >> 64)};
}

#ifdef PE_HAVE_X86_CLMUL
__attribute__((target("pclmul,sse4.1"))) inline U128 clmul_x86(std::uint64_t a, std::uint64_t b) noexcept {
  const __m128i va = _mm_set_epi64x(0, static_cast<long long>(a));
  const __m128i vb = _mm_set_epi64x(0, static_cast<long long>(b));
  const __m128i r = _mm_clmulepi64_si128(va, vb, 0x00);
  return {static_cast<std::uint64_t>(_mm_extract_epi64(r, 0)),
          static_cast<std::uint64_t>(_mm_extract_epi64(r, 1))};
}

inline bool cpu_has_clmul() noexcept {
  static const bool has = __builtin_cpu_supports("pclmul") && __builtin_cpu_supports("sse4.1");
  return has;
}
#endif

inline U128 clmul(std::uint64_t a, std::uint64_t b) noexcept {
#ifdef PE_HAVE_X86_CLMUL
  if (cpu_has_clmul()) return clmul_x86(a, b);
#endif
  return clmul_portable(a, b);
}

}  // namespace detail

struct Gf2_64 {
  using value_type = std::uint64_t;
  static constexpr unsigned bits = 64;
  // Low word of the modulus; the x^64 term is implicit.
  static constexpr std::uint64_t modulus_low = 0x1B;

  static constexpr value_type add(value_type a, value_type b) noexcept { return a ^ b; }

  static constexpr value_type reduce(detail::U128 p) noexcept {
    // x^64 == x^4 + x^3 + x + 1. Fold the high word twice; the second fold
    // has at most 4 + 4 bits and cannot overflow.
    const detail::U128 fold = detail::clmul_portable(p.hi, modulus_low);
    const std::uint64_t fold2 = detail::clmul_portable(fold.hi, modulus_low).lo;
    return p.lo ^ fold.lo ^ fold2;
  }

  static value_type mul(value_type a, value_type b) noexcept { return reduce_fast(detail::clmul(a, b)); }

  // Reference multiply, usable in constant expressions.
  static constexpr value_type mul_portable(value_type a, value_type b) noexcept {
    return reduce(detail::clmul_portable(a, b));
  }

 private:
  static value_type reduce_fast(detail::U128 p) noexcept {
    const detail::U128 fold = detail::clmul(p.hi, modulus_low);
    const std::uint64_t fold2 = detail::clmul(fold.hi, modulus_low).lo;
    return p.lo ^ fold.lo ^ fold2;
  }
};

// GF(2^b), 1 <= b <= 16, reduced by a fixed irreducible polynomial per b.
class SmallBinaryField {
 public:
  using value_type = std::uint32_t;
  static constexpr unsigned max_bits = 16;

  // Full modulus including the leading x^b term.
  static constexpr std::array<std::uint32_t, max_bits + 1> kModulus = {
      0x0,                 // unused
      0x3,                 // x + 1
      0x7,                 // x^2 + x + 1
      0xB,                 // x^3 + x + 1
      0x13,                // x^4 + x + 1
      0x25,                // x^5 + x^2 + 1
      0x43,                // x^6 + x + 1
      0x83,                // x^7 + x + 1
      0x11B,               // x^8 + x^4 + x^3 + x + 1
      0x211,               // x^9 + x^4 + 1
      0x409,               // x^10 + x^3 + 1
      0x805,               // x^11 + x^2 + 1
      0x1053,              // x^12 + x^6 + x^4 + x + 1
      0x201B,              // x^13 + x^4 + x^3 + x + 1
      0x4443,              // x^14 + x^10 + x^6 + x + 1
      0x8003,              // x^15 + x + 1
      0x1100B,             // x^16 + x^12 + x^3 + x + 1
  };

  explicit constexpr SmallBinaryField(unsigned bits) : bits_(bits) {
    if (bits < 1 || bits > max_bits) {
      throw std::invalid_argument("small field width must be in [1, 16], got " + std::to_string(bits));
    }
  }

  [[nodiscard]] constexpr unsigned bits() const noexcept { return bits_; }
  [[nodiscard]] constexpr std::uint32_t size() const noexcept { return std::uint32_t{1} << bits_; }
  [[nodiscard]] constexpr std::uint32_t modulus() const noexcept { return kModulus[bits_]; }

  static constexpr value_type add(value_type a, value_type b) noexcept { return a ^ b; }

  [[nodiscard]] constexpr value_type mul(value_type a, value_type b) const noexcept {
    std::uint32_t r = 0;
    for (unsigned i = 0; i < bits_; ++i) {
      if (b & (1u << i)) r ^= a << i;
    }
    for (int i = static_cast<int>(2 * bits_) - 2; i >= static_cast<int>(bits_); --i) {
      if (r & (1u << i)) r ^= modulus() << (i - static_cast<int>(bits_));
    }
    return r;
  }

 private:
  unsigned bits_;
};

}  // namespace pe
