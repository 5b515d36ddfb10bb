#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "hcpdq/zp/field.hpp"

namespace hcpdq::zp {

// Polynomial over Z_p, coefficients in ascending degree with trailing zeros
// trimmed. The zero polynomial has no coefficients and degree -1.
class ZpPoly {
 public:
  ZpPoly() = default;
  explicit ZpPoly(std::vector<u64> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  static ZpPoly constant(u64 c) { return ZpPoly(std::vector<u64>{c}); }
  static ZpPoly monomial(std::size_t degree) {
    std::vector<u64> c(degree + 1, 0);
    c[degree] = 1;
    return ZpPoly(std::move(c));
  }

  long degree() const noexcept { return static_cast<long>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  u64 coeff(std::size_t k) const noexcept { return k < coeffs_.size() ? coeffs_[k] : 0; }
  u64 leading() const noexcept { return coeffs_.empty() ? 0 : coeffs_.back(); }
  const std::vector<u64>& coeffs() const noexcept { return coeffs_; }

  friend bool operator==(const ZpPoly&, const ZpPoly&) = default;

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }

  std::vector<u64> coeffs_;
};

namespace poly {

inline u64 eval(const ZpPoly& f, u64 x, const Field& F) {
  u64 acc = 0;
  const auto& c = f.coeffs();
  for (std::size_t k = c.size(); k-- > 0;) acc = F.add(F.mul(acc, x), c[k]);
  return acc;
}

inline ZpPoly sub(const ZpPoly& a, const ZpPoly& b, const Field& F) {
  std::vector<u64> c(std::max(a.coeffs().size(), b.coeffs().size()), 0);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = F.sub(a.coeff(k), b.coeff(k));
  return ZpPoly(std::move(c));
}

inline ZpPoly mul(const ZpPoly& a, const ZpPoly& b, const Field& F) {
  if (a.is_zero() || b.is_zero()) return {};
  const auto& x = a.coeffs();
  const auto& y = b.coeffs();
  std::vector<u64> c(x.size() + y.size() - 1, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) c[i + j] = F.add(c[i + j], F.mul(x[i], y[j]));
  }
  return ZpPoly(std::move(c));
}

inline ZpPoly make_monic(const ZpPoly& f, const Field& F) {
  if (f.is_zero() || f.leading() == 1) return f;
  const u64 li = F.inv(f.leading());
  std::vector<u64> c = f.coeffs();
  for (auto& x : c) x = F.mul(x, li);
  return ZpPoly(std::move(c));
}

// Quotient and remainder of a by a nonzero divisor b.
inline std::pair<ZpPoly, ZpPoly> divmod(const ZpPoly& a, const ZpPoly& b, const Field& F) {
  if (b.is_zero()) throw Error(Errc::kInvalidParams, "polynomial division by zero");
  if (a.degree() < b.degree()) return {ZpPoly{}, a};
  std::vector<u64> r = a.coeffs();
  const auto& d = b.coeffs();
  const std::size_t db = d.size() - 1;
  const u64 lead_inv = d.back() == 1 ? 1 : F.inv(d.back());
  std::vector<u64> q(r.size() - db, 0);
  for (std::size_t k = r.size(); k-- > db;) {
    if (r[k] == 0) continue;
    const u64 factor = lead_inv == 1 ? r[k] : F.mul(r[k], lead_inv);
    q[k - db] = factor;
    for (std::size_t j = 0; j <= db; ++j) r[k - db + j] = F.sub(r[k - db + j], F.mul(factor, d[j]));
  }
  r.resize(db);
  return {ZpPoly(std::move(q)), ZpPoly(std::move(r))};
}

inline ZpPoly mod(const ZpPoly& a, const ZpPoly& b, const Field& F) { return divmod(a, b, F).second; }

// Monic gcd; gcd(0, 0) is the zero polynomial.
inline ZpPoly gcd(ZpPoly a, ZpPoly b, const Field& F) {
  while (!b.is_zero()) {
    ZpPoly r = mod(a, b, F);
    a = std::move(b);
    b = std::move(r);
  }
  return make_monic(a, F);
}

// (a * b) mod m for a, b already reduced mod the monic m.
inline ZpPoly mulmod(const ZpPoly& a, const ZpPoly& b, const ZpPoly& m, const Field& F) {
  return mod(mul(a, b, F), m, F);
}

// base^exp mod m.
inline ZpPoly powmod(const ZpPoly& base, u64 exp, const ZpPoly& m, const Field& F) {
  ZpPoly result = mod(ZpPoly::constant(1), m, F);
  ZpPoly b = mod(base, m, F);
  while (exp != 0) {
    if (exp & 1) result = mulmod(result, b, m, F);
    exp >>= 1;
    if (exp != 0) b = mulmod(b, b, m, F);
  }
  return result;
}

// X^exp mod m, left-to-right so that the multiply step is a shift.
inline ZpPoly powmod_x(u64 exp, const ZpPoly& m, const Field& F) {
  ZpPoly result = mod(ZpPoly::constant(1), m, F);
  if (exp == 0) return result;
  for (int bit = static_cast<int>(log2_floor(exp)); bit >= 0; --bit) {
    result = mulmod(result, result, m, F);
    if ((exp >> bit) & 1) {
      std::vector<u64> shifted = result.coeffs();
      shifted.insert(shifted.begin(), 0);
      result = mod(ZpPoly(std::move(shifted)), m, F);
    }
  }
  return result;
}

// Expands prod (X - r) over the given roots.
inline ZpPoly from_roots(const std::vector<u64>& roots, const Field& F) {
  std::vector<u64> c{1};
  for (u64 r : roots) {
    std::vector<u64> next(c.size() + 1, 0);
    const u64 nr = F.neg(F.reduce(r));
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] = F.add(next[k + 1], c[k]);
      next[k] = F.add(next[k], F.mul(c[k], nr));
    }
    c = std::move(next);
  }
  return ZpPoly(std::move(c));
}

}  // namespace poly
}  // namespace hcpdq::zp
