#pragma once

#include <cstdint>

#include "hcpdq/arith.hpp"

namespace hcpdq::zp {

// Tally of Z_p operations performed through a Field.
struct OpCount {
  std::uint64_t adds = 0;
  std::uint64_t muls = 0;
  std::uint64_t invs = 0;

  std::uint64_t total() const noexcept { return adds + muls + invs; }
  friend bool operator==(const OpCount&, const OpCount&) = default;
};

// Prime field Z_p. The optional OpCount is owned by the caller; a Field is
// otherwise an immutable value and safe to share between threads when no
// counter is attached.
class Field {
 public:
  explicit Field(u64 p, OpCount* ops = nullptr) : mod_(checked(p)), ops_(ops) {}

  u64 p() const noexcept { return mod_.value(); }
  const Modulus& modulus() const noexcept { return mod_; }

  Field with_counter(OpCount* ops) const {
    Field f = *this;
    f.ops_ = ops;
    return f;
  }

  u64 reduce(u64 x) const noexcept { return mod_.reduce(x); }
  u64 from_signed(i64 x) const noexcept { return mod_.from_signed(x); }

  u64 add(u64 a, u64 b) const noexcept {
    if (ops_) ++ops_->adds;
    return mod_.add(a, b);
  }
  u64 sub(u64 a, u64 b) const noexcept {
    if (ops_) ++ops_->adds;
    return mod_.sub(a, b);
  }
  u64 neg(u64 a) const noexcept { return mod_.neg(a); }
  u64 mul(u64 a, u64 b) const noexcept {
    if (ops_) ++ops_->muls;
    return mod_.mul(a, b);
  }
  u64 inv(u64 a) const {
    if (ops_) ++ops_->invs;
    return mod_.inv(a);
  }
  u64 pow(u64 base, u64 exp) const noexcept {
    u64 result = 1;
    base = mod_.reduce(base);
    while (exp != 0) {
      if (exp & 1) result = mul(result, base);
      exp >>= 1;
      if (exp != 0) base = mul(base, base);
    }
    return result;
  }

 private:
  static u64 checked(u64 p) {
    if (!is_prime(p)) throw Error(Errc::kInvalidParams, "p = " + std::to_string(p) + " is not prime");
    return p;
  }

  Modulus mod_;
  OpCount* ops_ = nullptr;
};

// base^exp mod p by square-and-multiply.
inline u64 mod_pow(u64 base, u64 exp, u64 p) { return Modulus(p).pow(base, exp); }

// a^{-1} mod p; throws ZeroInverse when a == 0 (mod p).
inline u64 mod_inv(u64 a, u64 p) { return Modulus(p).inv(a); }

}  // namespace hcpdq::zp
