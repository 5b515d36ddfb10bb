#pragma once

#include <cstdint>

#include "hcpdq/error.hpp"

namespace hcpdq {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// A word-sized modulus q < 2^63 with a precomputed Barrett constant
// floor((2^128 - 1) / q), so products of two residues reduce without a
// 128-bit division.
class Modulus {
 public:
  Modulus() = default;

  explicit Modulus(u64 q) : value_(q) {
    if (q < 2 || (q >> 63) != 0) {
      throw Error(Errc::kInvalidParams, "modulus must lie in [2, 2^63)");
    }
    const u128 ratio = ~u128{0} / q;
    ratio_lo_ = static_cast<u64>(ratio);
    ratio_hi_ = static_cast<u64>(ratio >> 64);
  }

  u64 value() const noexcept { return value_; }

  u64 reduce(u64 x) const noexcept { return x >= value_ ? x % value_ : x; }

  // x mod q for any x < 2^128.
  u64 reduce128(u128 x) const noexcept {
    const u64 x0 = static_cast<u64>(x);
    const u64 x1 = static_cast<u64>(x >> 64);
    const u64 carry = static_cast<u64>((u128{x0} * ratio_lo_) >> 64);
    const u128 t0 = u128{x0} * ratio_hi_;
    const u64 t0_lo = static_cast<u64>(t0);
    const u64 mid = t0_lo + carry;
    const u64 hi = static_cast<u64>(t0 >> 64) + (mid < t0_lo ? 1 : 0);
    const u128 t1 = u128{x1} * ratio_lo_;
    const u64 t1_lo = static_cast<u64>(t1);
    const u64 mid2 = mid + t1_lo;
    const u64 carry2 = static_cast<u64>(t1 >> 64) + (mid2 < mid ? 1 : 0);
    const u64 quotient = x1 * ratio_hi_ + hi + carry2;
    u64 r = x0 - quotient * value_;
    while (r >= value_) r -= value_;
    return r;
  }

  u64 add(u64 a, u64 b) const noexcept {
    const u64 s = a + b;
    return s >= value_ ? s - value_ : s;
  }
  u64 sub(u64 a, u64 b) const noexcept { return a >= b ? a - b : a + value_ - b; }
  u64 neg(u64 a) const noexcept { return a == 0 ? 0 : value_ - a; }
  u64 mul(u64 a, u64 b) const noexcept { return reduce128(u128{a} * b); }

  u64 pow(u64 base, u64 exp) const noexcept {
    u64 result = 1 % value_;
    base = reduce(base);
    while (exp != 0) {
      if (exp & 1) result = mul(result, base);
      base = mul(base, base);
      exp >>= 1;
    }
    return result;
  }

  // Extended Euclid; throws ZeroInverse on a == 0 (mod q).
  u64 inv(u64 a) const {
    a = reduce(a);
    if (a == 0) throw Error(Errc::kZeroInverse, "0 has no inverse");
    i64 t = 0, new_t = 1;
    u64 r = value_, new_r = a;
    while (new_r != 0) {
      const u64 quotient = r / new_r;
      const i64 tmp_t = t - static_cast<i64>(quotient) * new_t;
      t = new_t;
      new_t = tmp_t;
      const u64 tmp_r = r - quotient * new_r;
      r = new_r;
      new_r = tmp_r;
    }
    if (r != 1) throw Error(Errc::kZeroInverse, "element is not invertible");
    return t < 0 ? static_cast<u64>(t + static_cast<i64>(value_)) : static_cast<u64>(t);
  }

  // Representative of a signed integer.
  u64 from_signed(i64 x) const noexcept {
    if (x >= 0) return static_cast<u64>(x) % value_;
    const u64 m = static_cast<u64>(-(x + 1)) % value_;
    return value_ - 1 - m;
  }

  // Centered representative in (-q/2, q/2].
  i64 centered(u64 x) const noexcept {
    return x > value_ / 2 ? static_cast<i64>(x) - static_cast<i64>(value_) : static_cast<i64>(x);
  }

  friend bool operator==(const Modulus& a, const Modulus& b) { return a.value_ == b.value_; }

 private:
  u64 value_ = 0;
  u64 ratio_lo_ = 0;
  u64 ratio_hi_ = 0;
};

// Deterministic Miller-Rabin; the base set is exact for all 64-bit inputs.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) return n == small;
  }
  u64 d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  auto mulmod = [n](u64 a, u64 b) { return static_cast<u64>(u128{a} * b % n); };
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = 1, base = a % n, e = d;
    while (e != 0) {
      if (e & 1) x = mulmod(x, base);
      base = mulmod(base, base);
      e >>= 1;
    }
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mulmod(x, x);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline bool is_power_of_two(u64 x) { return x != 0 && (x & (x - 1)) == 0; }

inline unsigned log2_floor(u64 x) { return x == 0 ? 0 : 63U - static_cast<unsigned>(__builtin_clzll(x)); }

inline u64 next_power_of_two(u64 x) {
  u64 r = 1;
  while (r < x) r <<= 1;
  return r;
}

}  // namespace hcpdq
