#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hcpdq/homcomp/bsgs.hpp"
#include "hcpdq/zp/roots.hpp"
#include "hcpdq/zp/vandermonde.hpp"

namespace hcpdq::homcomp {

inline constexpr std::uint16_t kLayoutVersion = 1;

// Where w = C v and e = C d sit in the decrypted payload. Packed: one
// ciphertext, w in row 0 slots [0, s), e in row 1 slots [0, s). Unpacked: two
// ciphertexts, w then e, each in row 0 slots [0, s).
struct AnswerLayout {
  std::uint32_t s = 0;
  bool packed = true;
  friend bool operator==(const AnswerLayout&, const AnswerLayout&) = default;
};

template <he::HeBackend B>
struct CompressedAnswer {
  std::vector<typename B::Ciphertext> ciphertexts;
  AnswerLayout layout;
};

// Encrypts a length-N vector over ceil(N/n) ciphertexts in the standard layout.
template <he::HeBackend B>
std::vector<typename B::Ciphertext> encrypt_vector(std::span<const u64> v, const typename B::KeySet& keys,
                                                   std::mt19937_64& rng) {
  const std::size_t n = keys.params().n;
  std::vector<typename B::Ciphertext> out;
  for (std::size_t off = 0; off < v.size(); off += n) {
    const std::size_t len = std::min(n, v.size() - off);
    out.push_back(B::encrypt(he::SlotMatrix::from_vector(v.subspan(off, len), n), keys, rng));
  }
  return out;
}

template <he::HeBackend B>
std::vector<u64> decrypt_vector(std::span<const typename B::Ciphertext> cs, std::size_t length,
                                const typename B::KeySet& keys) {
  std::vector<u64> out;
  out.reserve(cs.size() * keys.params().n);
  for (const auto& c : cs) {
    const auto m = B::decrypt(c, keys);
    out.insert(out.end(), m.values().begin(), m.values().end());
  }
  if (out.size() < length) throw Error(Errc::kInvalidParams, "too few ciphertexts for the vector length");
  out.resize(length);
  return out;
}

// Multiplicative depth of power_fermat for the prime p.
inline int fermat_depth(u64 p) {
  const u64 e = p - 1;
  int acc = -1;
  for (int bit = 0; bit <= static_cast<int>(log2_floor(e)); ++bit) {
    if ((e >> bit) & 1) acc = acc < 0 ? bit : std::max(acc, bit) + 1;
  }
  return acc;
}

// Slotwise d^(p-1): 1 where d is nonzero, 0 elsewhere. Squarings for every
// bit of p - 1, with the set bits folded in as they appear.
template <he::HeBackend B>
std::vector<typename B::Ciphertext> power_fermat(he::Evaluator<B>& ev, std::span<const typename B::Ciphertext> cd) {
  using Ct = typename B::Ciphertext;
  const u64 e = ev.params().p - 1;
  const int top = static_cast<int>(log2_floor(e));
  std::vector<Ct> out;
  for (const Ct& c : cd) {
    std::optional<Ct> acc;
    Ct sq = c;
    for (int bit = 0; bit <= top; ++bit) {
      if ((e >> bit) & 1) acc = acc ? ev.mul(*acc, sq) : sq;
      if (bit < top) sq = ev.mul(sq, sq);
    }
    out.push_back(std::move(*acc));
  }
  return out;
}

// w = C v for an index vector v.
template <he::HeBackend B>
typename B::Ciphertext comp_idx(he::Evaluator<B>& ev, const BsgsPlan& plan,
                                std::span<const typename B::Ciphertext> cv) {
  const auto blocks = pack_pair<B>(ev, plan.params(), cv, std::nullopt);
  return bsgs_matvec<B>(ev, plan, blocks);
}

// Compresses an s-sparse d. With an index hint (the index vector of d, e.g.
// from a match predicate) the Fermat circuit is skipped. `plan` must evaluate
// the power matrix on both rows.
template <he::HeBackend B>
CompressedAnswer<B> comp(he::Evaluator<B>& ev, const BsgsPlan& plan, std::span<const typename B::Ciphertext> cd,
                         std::optional<std::span<const typename B::Ciphertext>> index_hint = std::nullopt,
                         bool packed = true) {
  using Ct = typename B::Ciphertext;
  std::vector<Ct> computed;
  std::span<const Ct> cv;
  if (index_hint) {
    cv = *index_hint;
  } else {
    computed = power_fermat<B>(ev, cd);
    cv = computed;
  }
  CompressedAnswer<B> ans;
  ans.layout = {static_cast<std::uint32_t>(plan.params().s), packed};
  if (packed) {
    const auto blocks = pack_pair<B>(ev, plan.params(), cv, cd);
    ans.ciphertexts.push_back(bsgs_matvec<B>(ev, plan, blocks));
  } else {
    ans.ciphertexts.push_back(comp_idx<B>(ev, plan, cv));
    ans.ciphertexts.push_back(comp_idx<B>(ev, plan, cd));
  }
  return ans;
}

// [C; D] v in one pass for a cleartext database folded into D = C diag(db):
// `plan` must carry C on the top row and D on the bottom row.
template <he::HeBackend B>
CompressedAnswer<B> comp_masked(he::Evaluator<B>& ev, const BsgsPlan& plan,
                                std::span<const typename B::Ciphertext> cv) {
  const auto blocks = pack_pair<B>(ev, plan.params(), cv, cv);
  CompressedAnswer<B> ans;
  ans.layout = {static_cast<std::uint32_t>(plan.params().s), true};
  ans.ciphertexts.push_back(bsgs_matvec<B>(ev, plan, blocks));
  return ans;
}

// Decrypted (w, e) of an answer.
template <he::HeBackend B>
std::pair<std::vector<u64>, std::vector<u64>> open_answer(const CompressedAnswer<B>& ans,
                                                          const typename B::KeySet& keys) {
  const std::size_t s = ans.layout.s;
  const std::size_t expected = ans.layout.packed ? 1 : 2;
  if (ans.ciphertexts.size() != expected) throw Error(Errc::kFormat, "answer has the wrong ciphertext count");
  if (s > keys.params().n / 2) throw Error(Errc::kFormat, "answer layout exceeds the slot count");
  std::vector<u64> w, e;
  if (ans.layout.packed) {
    const auto m = B::decrypt(ans.ciphertexts[0], keys);
    w.assign(m.row(0).begin(), m.row(0).begin() + static_cast<std::ptrdiff_t>(s));
    e.assign(m.row(1).begin(), m.row(1).begin() + static_cast<std::ptrdiff_t>(s));
  } else {
    const auto mw = B::decrypt(ans.ciphertexts[0], keys);
    const auto me = B::decrypt(ans.ciphertexts[1], keys);
    w.assign(mw.row(0).begin(), mw.row(0).begin() + static_cast<std::ptrdiff_t>(s));
    e.assign(me.row(0).begin(), me.row(0).begin() + static_cast<std::ptrdiff_t>(s));
  }
  return {std::move(w), std::move(e)};
}

// Index set and its 0/1 expansion from a ciphertext of w = C v.
template <he::HeBackend B>
std::pair<zp::IndexSet, std::vector<u64>> decomp_idx(const typename B::Ciphertext& cw,
                                                     const typename B::KeySet& keys,
                                                     const CompressionParams& params) {
  const auto m = B::decrypt(cw, keys);
  const std::vector<u64> w(m.row(0).begin(), m.row(0).begin() + static_cast<std::ptrdiff_t>(params.s));
  const zp::Field F(params.he.p);
  auto I = zp::reconst_idx(w, F, params.N);
  auto dense = I.indicator(params.N);
  return {std::move(I), std::move(dense)};
}

// Cleartext half of decompression: support from w, values from e.
inline zp::SparseVector decomp_payload(std::span<const u64> w, std::span<const u64> e,
                                       const CompressionParams& params, zp::OpCount* ops = nullptr) {
  const zp::Field F(params.he.p, ops);
  const zp::IndexSet I = zp::reconst_idx(w, F, params.N);
  return zp::solve_vandermonde_sub(e, I, F, params.N);
}

template <he::HeBackend B>
zp::SparseVector decomp(const CompressedAnswer<B>& ans, const typename B::KeySet& keys,
                        const CompressionParams& params, zp::OpCount* ops = nullptr) {
  if (ans.layout.s != params.s) throw Error(Errc::kFormat, "answer was compressed for another sparsity bound");
  const auto [w, e] = open_answer<B>(ans, keys);
  return decomp_payload(w, e, params, ops);
}

}  // namespace hcpdq::homcomp
