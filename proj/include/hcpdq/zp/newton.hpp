#pragma once

#include <span>
#include <string>
#include <vector>

#include "hcpdq/zp/poly.hpp"

namespace hcpdq::zp {

// Coefficients of the monic degree-s polynomial whose root multiset has the
// given first s power sums, written ascending (s+1 values).
//
// With a_0 = 1 and a_k = k^{-1} sum_{i=1..k} (-1)^{i-1} a_{k-i} w_i, the result
// is sum_k (-1)^k a_k X^{s-k}. Requires p > s so every k^{-1} exists.
// The solver keeps the table of k^{-1} so repeated calls allocate nothing.
class NewtonSolver {
 public:
  NewtonSolver(const Field& F, std::size_t max_s) : F_(F), inv_(max_s + 1, 1) {
    if (max_s == 0) throw Error(Errc::kInvalidParams, "need at least one power sum");
    if (F.p() <= max_s) {
      throw Error(Errc::kModulusTooSmall, "p = " + std::to_string(F.p()) + " must exceed s = " + std::to_string(max_s));
    }
    // inv[k] = -(p/k) inv[p mod k]
    for (std::size_t k = 2; k <= max_s; ++k) inv_[k] = F.neg(F.mul(F.p() / k, inv_[F.p() % k]));
  }

  std::size_t max_s() const noexcept { return inv_.size() - 1; }

  void operator()(std::span<const u64> power_sums, std::span<u64> out) const {
    const std::size_t s = power_sums.size();
    if (s == 0 || s > max_s()) throw Error(Errc::kInvalidParams, "power sum count outside the solver's range");
    if (out.size() != s + 1) throw Error(Errc::kInvalidParams, "output span must hold s+1 coefficients");
    const Field& F = F_;
    // Elementary symmetric values a_k, stored temporarily at out[k].
    out[0] = 1;
    for (std::size_t k = 1; k <= s; ++k) {
      u64 acc = 0;
      for (std::size_t i = 1; i <= k; ++i) {
        const u64 term = F.mul(out[k - i], F.reduce(power_sums[i - 1]));
        acc = (i & 1) ? F.add(acc, term) : F.sub(acc, term);
      }
      out[k] = F.mul(acc, inv_[k]);
    }
    // Reverse into ascending order and apply the alternating sign.
    for (std::size_t k = 1; k <= s; k += 2) out[k] = F.neg(out[k]);
    for (std::size_t lo = 0, hi = s; lo < hi; ++lo, --hi) std::swap(out[lo], out[hi]);
  }

 private:
  Field F_;
  std::vector<u64> inv_;
};

inline void newton_coeffs_into(std::span<const u64> power_sums, const Field& F, std::span<u64> out) {
  if (power_sums.empty()) throw Error(Errc::kInvalidParams, "need at least one power sum");
  NewtonSolver(F, power_sums.size())(power_sums, out);
}

inline ZpPoly newton_coeffs(std::span<const u64> power_sums, const Field& F) {
  std::vector<u64> c(power_sums.size() + 1);
  newton_coeffs_into(power_sums, F, c);
  return ZpPoly(std::move(c));
}

// Divides out every factor of X.
inline ZpPoly strip_zero_roots(const ZpPoly& f) {
  const auto& c = f.coeffs();
  std::size_t k = 0;
  while (k < c.size() && c[k] == 0) ++k;
  return ZpPoly(std::vector<u64>(c.begin() + static_cast<std::ptrdiff_t>(k), c.end()));
}

}  // namespace hcpdq::zp
