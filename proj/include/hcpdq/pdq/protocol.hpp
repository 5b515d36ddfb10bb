#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcpdq/homcomp/compress.hpp"
#include "hcpdq/pdq/database.hpp"

namespace hcpdq::pdq {

enum class Predicate : std::uint8_t { kExactMatch = 1 };
enum class PostFn : std::uint8_t { kIdentity = 1 };

inline bool known_predicate(std::uint8_t id) { return id == static_cast<std::uint8_t>(Predicate::kExactMatch); }
inline bool known_post_fn(std::uint8_t id) { return id == static_cast<std::uint8_t>(PostFn::kIdentity); }

// Levels of the equality circuit 1 - (x - k)^(p-1): the Fermat power plus the
// plaintext negation.
inline int match_depth(u64 p) { return homcomp::fermat_depth(p) + 1; }

// Match, then mask, then the hint-path comp (pack, diagonals, output mask).
inline int required_levels(u64 p) { return match_depth(p) + 1 + 3; }

// Same without the mask step, for the folded [C; D] matrix.
inline int required_levels_masked(u64 p) { return match_depth(p) + 3; }

// Compression parameters for a database of `records` rows, with the level
// budget the answer pipeline needs.
inline homcomp::CompressionParams pdq_params(std::size_t records, std::size_t s, std::size_t n, u64 p) {
  homcomp::CompressionParams params{records, s, {n, p, required_levels(p)}};
  params.validate();
  return params;
}

template <he::HeBackend B>
struct PdqQuery {
  Predicate predicate = Predicate::kExactMatch;
  PostFn post = PostFn::kIdentity;
  typename B::Ciphertext condition;  // x in every slot
};

template <he::HeBackend B>
struct ClientState {
  typename B::KeySet keys;
  homcomp::CompressionParams params;
  u64 x = 0;  // condition of the last query
};

struct PdqMatch {
  u64 index = 0;  // 1-based record position
  u64 value = 0;
  friend bool operator==(const PdqMatch&, const PdqMatch&) = default;
};

struct PdqResult {
  std::vector<PdqMatch> matches;  // sorted by index

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : matches) arr.push_back({m.index, m.value});
    return {{"matches", arr}};
  }

  friend bool operator==(const PdqResult&, const PdqResult&) = default;
};

// What an honest run must return, from the plaintext table.
inline PdqResult evaluate_cleartext(const Database& db, u64 x) {
  PdqResult r;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db[i].key == x) r.matches.push_back({i + 1, db[i].value});
  }
  return r;
}

template <he::HeBackend B>
ClientState<B> make_client(const homcomp::CompressionParams& params, std::uint64_t seed) {
  params.validate();
  return {B::keygen(params.he, homcomp::required_rotations(params), seed), params, 0};
}

template <he::HeBackend B>
PdqQuery<B> query(u64 x, ClientState<B>& st, std::mt19937_64& rng) {
  if (x >= st.params.he.p) {
    throw Error(Errc::kInvalidParams, "condition " + std::to_string(x) + " is not below p = " +
                                          std::to_string(st.params.he.p));
  }
  st.x = x;
  PdqQuery<B> q;
  q.condition = B::encrypt(he::SlotMatrix(st.params.he.n, x), st.keys, rng);
  return q;
}

namespace detail {

// Per-block plaintext with f(record) in the slots that hold records and 0 in
// the padding past N.
template <class F>
he::SlotMatrix block_plain(const Database& db, std::size_t block, std::size_t n, F&& f) {
  he::SlotMatrix m(n);
  auto v = m.values();
  const std::size_t off = block * n;
  for (std::size_t t = 0; t < n && off + t < db.size(); ++t) v[t] = f(db[off + t]);
  return m;
}

inline void check_db(const Database& db, const homcomp::CompressionParams& params) {
  if (db.size() != params.N) {
    throw Error(Errc::kInvalidParams, "database has " + std::to_string(db.size()) + " records, parameters say " +
                                          std::to_string(params.N));
  }
}

}  // namespace detail

// Encrypted index vector: slot i is 1 when key_i = x, else 0 (also 0 in the
// padding slots).
template <he::HeBackend B>
std::vector<typename B::Ciphertext> match_exact(he::Evaluator<B>& ev, const typename B::Ciphertext& condition,
                                                const Database& db, const homcomp::CompressionParams& params) {
  using Ct = typename B::Ciphertext;
  detail::check_db(db, params);
  const u64 p = params.he.p;
  const std::size_t n = params.he.n;
  std::vector<Ct> out;
  for (std::size_t c = 0; c < params.input_ciphertexts(); ++c) {
    const Ct diff = ev.add_plain(condition, detail::block_plain(db, c, n, [p](const Record& r) {
                                   return r.key == 0 ? 0 : p - r.key;
                                 }));
    const Ct y = homcomp::power_fermat<B>(ev, std::span<const Ct>(&diff, 1))[0];
    const Ct neg = ev.mul_plain(y, detail::block_plain(db, c, n, [p](const Record&) { return p - 1; }));
    out.push_back(ev.add_plain(neg, detail::block_plain(db, c, n, [](const Record&) { return u64{1}; })));
  }
  return out;
}

template <he::HeBackend B>
std::vector<typename B::Ciphertext> match(he::Evaluator<B>& ev, const PdqQuery<B>& q, const Database& db,
                                          const homcomp::CompressionParams& params) {
  switch (q.predicate) {
    case Predicate::kExactMatch:
      return match_exact<B>(ev, q.condition, db, params);
  }
  throw Error(Errc::kProtocol, "unknown predicate");
}

// d_i = v_i * value_i.
template <he::HeBackend B>
std::vector<typename B::Ciphertext> mask(he::Evaluator<B>& ev, std::span<const typename B::Ciphertext> cv,
                                         const Database& db, const homcomp::CompressionParams& params) {
  detail::check_db(db, params);
  if (cv.size() != params.input_ciphertexts()) throw Error(Errc::kInvalidParams, "index vector ciphertext count");
  std::vector<typename B::Ciphertext> out;
  for (std::size_t c = 0; c < cv.size(); ++c) {
    out.push_back(ev.mul_plain(cv[c], detail::block_plain(db, c, params.he.n, [](const Record& r) { return r.value; })));
  }
  return out;
}

inline homcomp::BsgsPlan make_plan(const homcomp::CompressionParams& params) {
  const auto C = homcomp::build_vandermonde(params);
  return homcomp::BsgsPlan::build(params, C, C);
}

// Plan for answer_masked: C on the top row, C diag(values) on the bottom.
inline homcomp::BsgsPlan make_masked_plan(const homcomp::CompressionParams& params, const Database& db) {
  detail::check_db(db, params);
  std::vector<u64> values(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) values[i] = db[i].value;
  return homcomp::BsgsPlan::build(params, homcomp::build_vandermonde(params),
                                  homcomp::precompute_masked_matrix(values, params));
}

// Match, mask, then comp with the match output as the index hint.
template <he::HeBackend B>
homcomp::CompressedAnswer<B> answer(he::Evaluator<B>& ev, const homcomp::BsgsPlan& plan, const PdqQuery<B>& q,
                                    const Database& db) {
  if (q.post != PostFn::kIdentity) throw Error(Errc::kProtocol, "unknown post-processing function");
  const auto& params = plan.params();
  const auto cv = match<B>(ev, q, db, params);
  const auto cd = mask<B>(ev, cv, db, params);
  return homcomp::comp<B>(ev, plan, cd, std::span<const typename B::Ciphertext>(cv));
}

// Mask folded into the matrix; `plan` from make_masked_plan.
template <he::HeBackend B>
homcomp::CompressedAnswer<B> answer_masked(he::Evaluator<B>& ev, const homcomp::BsgsPlan& plan,
                                           const PdqQuery<B>& q, const Database& db) {
  if (q.post != PostFn::kIdentity) throw Error(Errc::kProtocol, "unknown post-processing function");
  const auto cv = match<B>(ev, q, db, plan.params());
  return homcomp::comp_masked<B>(ev, plan, cv);
}

// Every way a too-dense answer can fail to decode is reported as an overflow
// of the agreed sparsity bound.
template <he::HeBackend B>
PdqResult recover(const homcomp::CompressedAnswer<B>& ans, const ClientState<B>& st) {
  const auto& params = st.params;
  if (ans.layout.s != params.s) throw Error(Errc::kFormat, "answer was compressed for another sparsity bound");
  const auto [w, e] = homcomp::open_answer<B>(ans, st.keys);
  const zp::Field F(params.he.p);
  zp::SparseVector x;
  std::size_t support = 0;
  try {
    const auto I = zp::reconst_idx(w, F, params.N);
    support = I.size();
    x = zp::solve_vandermonde_sub(e, I, F, params.N);
  } catch (const Error& err) {
    switch (err.code()) {
      case Errc::kNotFullySplit:
      case Errc::kSingularSystem:
      case Errc::kInconsistentSystem:
        throw Error(Errc::kQueryOverflow, "more than s = " + std::to_string(params.s) + " matches (" +
                                              err.what() + ")");
      default:
        throw;
    }
  }
  // Stored values are never 0, so a matched index with value 0 means the
  // power sums came from a larger set.
  if (x.nonzeros() != support) {
    throw Error(Errc::kQueryOverflow, "more than s = " + std::to_string(params.s) + " matches");
  }
  PdqResult r;
  for (const auto& entry : x.entries()) r.matches.push_back({entry.index, entry.value});
  return r;
}

}  // namespace hcpdq::pdq
