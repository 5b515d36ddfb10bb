#pragma once

#include <span>
#include <vector>

#include "hcpdq/zp/field.hpp"
#include "hcpdq/zp/sparse.hpp"

namespace hcpdq::zp {

// Entry (j, i) of the s x N power matrix: i^j mod p, both 1-based.
inline u64 vandermonde_entry(u64 row, u64 col, const Field& F) { return F.pow(F.reduce(col), row); }

// Solves C_I x = e, where C_I keeps the columns of the power matrix selected
// by I (s equations, |I| unknowns), by Gauss-Jordan elimination over Z_p.
// Returns x scattered onto I as a length-`length` sparse vector; entries that
// solve to zero are omitted.
inline SparseVector solve_vandermonde_sub(std::span<const u64> e, const IndexSet& I, const Field& F,
                                          std::size_t length) {
  const std::size_t s = e.size();
  const std::size_t l = I.size();
  if (l > s) throw Error(Errc::kInvalidParams, "more unknowns than power sums");
  if (l == 0) {
    for (u64 x : e) {
      if (F.reduce(x) != 0) throw Error(Errc::kInconsistentSystem, "nonzero payload for an empty index set");
    }
    return SparseVector(length, {});
  }

  // Row-major augmented matrix, s rows by (l + 1) columns.
  const std::size_t w = l + 1;
  std::vector<u64> a(s * w);
  for (std::size_t k = 0; k < l; ++k) {
    const u64 base = F.reduce(I[k]);
    u64 power = base;
    for (std::size_t j = 0; j < s; ++j) {
      a[j * w + k] = power;
      power = F.mul(power, base);
    }
  }
  for (std::size_t j = 0; j < s; ++j) a[j * w + l] = F.reduce(e[j]);

  for (std::size_t col = 0; col < l; ++col) {
    std::size_t pivot = col;
    while (pivot < s && a[pivot * w + col] == 0) ++pivot;
    if (pivot == s) throw Error(Errc::kSingularSystem, "selected columns are linearly dependent");
    if (pivot != col) {
      for (std::size_t c = 0; c < w; ++c) std::swap(a[pivot * w + c], a[col * w + c]);
    }
    const u64 scale = F.inv(a[col * w + col]);
    for (std::size_t c = col; c < w; ++c) a[col * w + c] = F.mul(a[col * w + c], scale);
    for (std::size_t r = 0; r < s; ++r) {
      if (r == col) continue;
      const u64 factor = a[r * w + col];
      if (factor == 0) continue;
      for (std::size_t c = col; c < w; ++c) a[r * w + c] = F.sub(a[r * w + c], F.mul(factor, a[col * w + c]));
    }
  }
  for (std::size_t r = l; r < s; ++r) {
    if (a[r * w + l] != 0) throw Error(Errc::kInconsistentSystem, "payload is outside the column span");
  }

  std::vector<SparseEntry> entries;
  for (std::size_t k = 0; k < l; ++k) {
    if (a[k * w + l] != 0) entries.push_back({I[k], a[k * w + l]});
  }
  return SparseVector(length, std::move(entries));
}

}  // namespace hcpdq::zp
