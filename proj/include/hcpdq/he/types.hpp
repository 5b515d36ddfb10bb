#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hcpdq/arith.hpp"

namespace hcpdq::he {

enum class BackendId : std::uint8_t {
  kSimulator = 1,
  kBgvMini = 2,
};

inline const char* backend_name(BackendId id) {
  return id == BackendId::kSimulator ? "sim" : "bgv";
}

// Ring dimension n (power of two), plaintext prime p = 1 (mod 2n) and the
// multiplicative depth budget of fresh ciphertexts.
struct HeParams {
  std::size_t n = 0;
  u64 p = 0;
  int max_level = 1;

  std::size_t slots_per_row() const noexcept { return n / 2; }

  void validate() const {
    if (n < 2 || !is_power_of_two(n)) {
      throw Error(Errc::kInvalidParams, "n = " + std::to_string(n) + " is not a power of two >= 2");
    }
    if (!is_prime(p)) throw Error(Errc::kInvalidParams, "p = " + std::to_string(p) + " is not prime");
    if (p % (2 * n) != 1) {
      throw Error(Errc::kInvalidParams, "p = " + std::to_string(p) + " is not 1 mod 2n = " + std::to_string(2 * n));
    }
    if (max_level < 1) throw Error(Errc::kInvalidParams, "max_level must be at least 1");
    if (max_level > 255) throw Error(Errc::kInvalidParams, "max_level must fit in one byte");
  }

  friend bool operator==(const HeParams&, const HeParams&) = default;
};

// Plaintext in slot form: two rows of n/2 entries over Z_p, stored row-major.
// Rows and columns are 0-based here.
class SlotMatrix {
 public:
  SlotMatrix() = default;
  explicit SlotMatrix(std::size_t n, u64 fill = 0) : cols_(n / 2), data_(n, fill) {}

  // Standard layout of a length-<=n vector: the first n/2 entries go to row 0,
  // the rest to row 1, zero padded.
  static SlotMatrix from_vector(std::span<const u64> v, std::size_t n) {
    if (v.size() > n) throw Error(Errc::kInvalidParams, "vector longer than the slot count");
    SlotMatrix m(n);
    std::copy(v.begin(), v.end(), m.data_.begin());
    return m;
  }

  static SlotMatrix from_rows(std::span<const u64> top, std::span<const u64> bottom) {
    if (top.size() != bottom.size()) throw Error(Errc::kInvalidParams, "rows differ in length");
    SlotMatrix m(2 * top.size());
    std::copy(top.begin(), top.end(), m.data_.begin());
    std::copy(bottom.begin(), bottom.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(top.size()));
    return m;
  }

  std::size_t n() const noexcept { return data_.size(); }
  std::size_t cols() const noexcept { return cols_; }

  u64& at(std::size_t row, std::size_t col) { return data_[row * cols_ + col]; }
  u64 at(std::size_t row, std::size_t col) const { return data_[row * cols_ + col]; }

  std::span<u64> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const u64> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<u64> values() { return data_; }
  std::span<const u64> values() const { return data_; }

  // Inverse of from_vector.
  const std::vector<u64>& to_vector() const noexcept { return data_; }

  friend bool operator==(const SlotMatrix&, const SlotMatrix&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<u64> data_;
};

// Cleartext slot semantics shared by the backends and the tests.
namespace slots {

inline void check_shape(const SlotMatrix& a, const SlotMatrix& b) {
  if (a.n() != b.n()) throw Error(Errc::kInvalidParams, "slot matrices differ in shape");
}

inline SlotMatrix add(const SlotMatrix& a, const SlotMatrix& b, const Modulus& p) {
  check_shape(a, b);
  SlotMatrix r(a.n());
  for (std::size_t k = 0; k < a.n(); ++k) r.values()[k] = p.add(a.values()[k], b.values()[k]);
  return r;
}

inline SlotMatrix mul(const SlotMatrix& a, const SlotMatrix& b, const Modulus& p) {
  check_shape(a, b);
  SlotMatrix r(a.n());
  for (std::size_t k = 0; k < a.n(); ++k) r.values()[k] = p.mul(a.values()[k], b.values()[k]);
  return r;
}

// Left rotation of both rows by r: [v_0..v_{m-1}] -> [v_r..v_{m-1}, v_0..v_{r-1}].
inline SlotMatrix rotate_rows(const SlotMatrix& a, std::size_t r) {
  const std::size_t m = a.cols();
  SlotMatrix out(a.n());
  if (m == 0) return out;
  r %= m;
  for (std::size_t row = 0; row < 2; ++row) {
    for (std::size_t j = 0; j < m; ++j) out.at(row, j) = a.at(row, (j + r) % m);
  }
  return out;
}

inline SlotMatrix swap_rows(const SlotMatrix& a) {
  SlotMatrix out(a.n());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    out.at(0, j) = a.at(1, j);
    out.at(1, j) = a.at(0, j);
  }
  return out;
}

inline void check_reduced(const SlotMatrix& m, u64 p, std::size_t n) {
  if (m.n() != n) throw Error(Errc::kInvalidParams, "slot matrix does not match the ring dimension");
  for (u64 x : m.values()) {
    if (x >= p) throw Error(Errc::kInvalidParams, "slot value not reduced mod p");
  }
}

}  // namespace slots

// Row-rotation amounts (in [1, n/2)) and whether the row-swap key exists.
struct RotationSet {
  std::set<std::size_t> row_amounts;
  bool column = false;

  bool has_row(std::size_t r) const { return row_amounts.count(r) != 0; }
  friend bool operator==(const RotationSet&, const RotationSet&) = default;
};

struct OpCounters {
  std::uint64_t keyswitches = 0;
  std::uint64_t ct_mults = 0;
  std::uint64_t pt_mults = 0;
  std::uint64_t adds = 0;

  friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

}  // namespace hcpdq::he
