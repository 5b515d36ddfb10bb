#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hcpdq/zp/newton.hpp"
#include "hcpdq/zp/sparse.hpp"

namespace hcpdq::zp {

inline constexpr std::uint64_t kDefaultRootSeed = 0x5eedf00d;

namespace detail {

// Equal-degree splitting of a monic, squarefree product of distinct linear
// factors: gcd(f, (X + a)^((p-1)/2) - 1) separates the roots r with r + a a
// quadratic residue from the rest.
inline void split_linear(const ZpPoly& f, const Field& F, std::mt19937_64& rng, std::vector<u64>& roots) {
  if (f.degree() <= 0) return;
  if (f.degree() == 1) {
    roots.push_back(F.neg(f.coeff(0)));
    return;
  }
  std::uniform_int_distribution<u64> pick(0, F.p() - 1);
  const u64 half = (F.p() - 1) / 2;
  for (;;) {
    const ZpPoly shifted(std::vector<u64>{pick(rng), 1});
    ZpPoly t = poly::powmod(shifted, half, f, F);
    t = poly::sub(t, ZpPoly::constant(1), F);
    ZpPoly h = poly::gcd(f, t, F);
    if (h.degree() > 0 && h.degree() < f.degree()) {
      const ZpPoly other = poly::divmod(f, h, F).first;
      split_linear(h, F, rng, roots);
      split_linear(other, F, rng, roots);
      return;
    }
  }
}

}  // namespace detail

// All roots of g in [1, range], via Cantor-Zassenhaus restricted to linear
// factors. Throws NotFullySplit unless g is a product of distinct linear
// factors whose roots all lie in [1, range].
inline IndexSet find_roots(const ZpPoly& g_in, const Field& F, u64 range, std::uint64_t seed = kDefaultRootSeed) {
  if (g_in.is_zero()) throw Error(Errc::kInvalidParams, "zero polynomial has every root");
  const ZpPoly g = poly::make_monic(g_in, F);
  if (g.degree() == 0) return {};

  // gcd(g, X^p - X) keeps exactly the distinct Z_p-roots.
  const ZpPoly xp = poly::powmod_x(F.p(), g, F);
  const ZpPoly linear_part = poly::gcd(g, poly::sub(xp, ZpPoly::monomial(1), F), F);
  if (linear_part.degree() != g.degree()) {
    throw Error(Errc::kNotFullySplit, "polynomial of degree " + std::to_string(g.degree()) + " has only " +
                                          std::to_string(linear_part.degree()) + " distinct roots in Z_p");
  }

  std::vector<u64> roots;
  roots.reserve(static_cast<std::size_t>(g.degree()));
  if (F.p() == 2) {
    // No quadratic-residue split exists in Z_2; the candidates are 0 and 1.
    for (u64 x : {0ULL, 1ULL}) {
      if (poly::eval(linear_part, x, F) == 0) roots.push_back(x);
    }
  } else {
    std::mt19937_64 rng(seed);
    detail::split_linear(linear_part, F, rng, roots);
  }
  for (u64 r : roots) {
    if (r == 0 || r > range) {
      throw Error(Errc::kNotFullySplit, "root " + std::to_string(r) + " outside [1, " + std::to_string(range) + "]");
    }
  }
  return IndexSet::from_unsorted(std::move(roots));
}

// Recovers the support of an s-sparse 0/1 vector from its first s power sums.
inline IndexSet reconst_idx(std::span<const u64> power_sums, const Field& F, u64 length,
                            std::uint64_t seed = kDefaultRootSeed) {
  if (F.p() <= length) throw Error(Errc::kModulusTooSmall, "p must exceed the vector length");
  const ZpPoly f = newton_coeffs(power_sums, F);
  return find_roots(strip_zero_roots(f), F, length, seed);
}

}  // namespace hcpdq::zp
