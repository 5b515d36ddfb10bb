#pragma once

// Brute-force reference computations. They share no code path with the
// production decoders and exist so tests can cross-check them.

#include <span>
#include <vector>

#include "hcpdq/zp/field.hpp"

namespace hcpdq::zp::oracle {

// e_k over the multiset `values`: the sum of all products of k distinct
// positions, by direct enumeration of k-subsets.
inline u64 elementary_symmetric(std::span<const u64> values, std::size_t k, u64 p) {
  const std::size_t n = values.size();
  if (k > n) return 0;
  if (k == 0) return 1;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  u64 total = 0;
  for (;;) {
    u64 prod = 1;
    for (std::size_t i : pick) prod = static_cast<u64>(u128{prod} * (values[i] % p) % p);
    total = (total + prod) % p;
    std::size_t pos = k;
    while (pos > 0 && pick[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++pick[pos - 1];
    for (std::size_t i = pos; i < k; ++i) pick[i] = pick[i - 1] + 1;
  }
  return total;
}

// Power sums p_1..p_s of a multiset.
inline std::vector<u64> power_sums(std::span<const u64> values, std::size_t s, u64 p) {
  std::vector<u64> out(s, 0);
  for (u64 v : values) {
    u64 power = 1;
    for (std::size_t j = 0; j < s; ++j) {
      power = static_cast<u64>(u128{power} * (v % p) % p);
      out[j] = (out[j] + power) % p;
    }
  }
  return out;
}

// Roots of f in [1, range] by evaluating at every point.
inline std::vector<u64> trial_roots(std::span<const u64> ascending_coeffs, u64 range, u64 p) {
  std::vector<u64> roots;
  for (u64 x = 1; x <= range; ++x) {
    u64 acc = 0;
    for (std::size_t k = ascending_coeffs.size(); k-- > 0;) {
      acc = static_cast<u64>((u128{acc} * x + ascending_coeffs[k]) % p);
    }
    if (acc == 0) roots.push_back(x);
  }
  return roots;
}

}  // namespace hcpdq::zp::oracle
