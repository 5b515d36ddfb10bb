#pragma once

#include <span>
#include <vector>

#include "hcpdq/arith.hpp"

namespace hcpdq::bgv {

// Primitive 2n-th root of unity mod q (q = 1 mod 2n).
inline u64 find_primitive_root(std::size_t n, const Modulus& q) {
  const u64 order = 2 * n;
  if ((q.value() - 1) % order != 0) throw Error(Errc::kInvalidParams, "modulus is not 1 mod 2n");
  for (u64 g = 2; g < q.value(); ++g) {
    const u64 psi = q.pow(g, (q.value() - 1) / order);
    if (q.pow(psi, n) == q.value() - 1) return psi;
  }
  throw Error(Errc::kInvalidParams, "no primitive 2n-th root of unity");
}

// Negacyclic NTT over Z_q[X]/(X^n + 1) in natural order:
// forward(a)[i] = a(psi^(2i+1)).
class NttTables {
 public:
  NttTables(std::size_t n, const Modulus& q) : n_(n), q_(q) {
    if (!is_power_of_two(n)) throw Error(Errc::kInvalidParams, "NTT size must be a power of two");
    const u64 psi = find_primitive_root(n, q);
    const u64 psi_inv = q.inv(psi);
    const u64 omega = q.mul(psi, psi);
    const u64 omega_inv = q.mul(psi_inv, psi_inv);
    psi_pow_.resize(n);
    psi_inv_pow_.resize(n);
    const u64 n_inv = q.inv(n % q.value());
    u64 a = 1, b = n_inv;
    for (std::size_t j = 0; j < n; ++j) {
      psi_pow_[j] = a;
      psi_inv_pow_[j] = b;  // n^{-1} psi^{-j}
      a = q.mul(a, psi);
      b = q.mul(b, psi_inv);
    }
    const std::size_t half = n / 2;
    omega_pow_.resize(half);
    omega_inv_pow_.resize(half);
    a = 1;
    b = 1;
    for (std::size_t j = 0; j < half; ++j) {
      omega_pow_[j] = a;
      omega_inv_pow_[j] = b;
      a = q.mul(a, omega);
      b = q.mul(b, omega_inv);
    }
    bitrev_.resize(n);
    const unsigned bits = log2_floor(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (unsigned k = 0; k < bits; ++k) r |= ((i >> k) & 1) << (bits - 1 - k);
      bitrev_[i] = r;
    }
  }

  std::size_t n() const noexcept { return n_; }
  const Modulus& modulus() const noexcept { return q_; }

  void forward(std::span<u64> a) const {
    for (std::size_t j = 0; j < n_; ++j) a[j] = q_.mul(a[j], psi_pow_[j]);
    cyclic(a, omega_pow_);
  }

  void inverse(std::span<u64> a) const {
    cyclic(a, omega_inv_pow_);
    for (std::size_t j = 0; j < n_; ++j) a[j] = q_.mul(a[j], psi_inv_pow_[j]);
  }

 private:
  // In-place iterative radix-2 DFT with the given table of root powers.
  void cyclic(std::span<u64> a, const std::vector<u64>& roots) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const u64 w = roots[j * stride];
          const u64 u = a[start + j];
          const u64 v = q_.mul(a[start + j + half], w);
          a[start + j] = q_.add(u, v);
          a[start + j + half] = q_.sub(u, v);
        }
      }
    }
  }

  std::size_t n_;
  Modulus q_;
  std::vector<u64> psi_pow_, psi_inv_pow_, omega_pow_, omega_inv_pow_;
  std::vector<std::size_t> bitrev_;
};

}  // namespace hcpdq::bgv
