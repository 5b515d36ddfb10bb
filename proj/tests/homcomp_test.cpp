#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hcpdq/bgv/bgv.hpp"
#include "hcpdq/he/simulator.hpp"
#include "hcpdq/homcomp/compress.hpp"

namespace hcpdq::homcomp {
namespace {

using Sim = he::sim::Backend;
using Bgv = bgv::Backend;

// Power sums sum_i i^j x_i, straight from the definition.
std::vector<u64> power_sums_oracle(const std::vector<u64>& x, std::size_t s, u64 p) {
  std::vector<u64> out(s, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    for (std::size_t j = 1; j <= s; ++j) out[j - 1] = (out[j - 1] + zp::mod_pow(i + 1, j, p) * x[i]) % p;
  }
  return out;
}

std::vector<u64> random_sparse(std::mt19937_64& rng, std::size_t N, std::size_t count, u64 p) {
  std::vector<u64> d(N, 0);
  std::set<std::size_t> pos;
  while (pos.size() < count) pos.insert(rng() % N);
  for (auto i : pos) d[i] = 1 + rng() % (p - 1);
  return d;
}

std::vector<u64> indicator_of(const std::vector<u64>& d) {
  std::vector<u64> v(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) v[i] = d[i] != 0;
  return v;
}

template <class B>
struct Rig {
  CompressionParams params;
  typename B::KeySet keys;
  BsgsPlan plan;
  std::mt19937_64 rng;

  Rig(CompressionParams p, std::uint64_t seed) : params(p), rng(seed) {
    keys = B::keygen(params.he, required_rotations(params), seed);
    const auto C = build_vandermonde(params);
    plan = BsgsPlan::build(params, C, C);
  }
  std::vector<typename B::Ciphertext> encrypt(const std::vector<u64>& v) { return encrypt_vector<B>(v, keys, rng); }
};

TEST(Params, Validation) {
  EXPECT_NO_THROW((CompressionParams{4, 2, {8, 17, 3}}.validate()));
  try {
    CompressionParams{17, 2, {8, 17, 3}}.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kModulusTooSmall);
  }
  EXPECT_THROW((CompressionParams{4, 5, {8, 17, 3}}.validate()), Error);
  EXPECT_THROW((CompressionParams{4, 0, {8, 17, 3}}.validate()), Error);
}

TEST(Vandermonde, SmallExample) {
  const auto C = build_vandermonde({3, 2, {8, 65537, 1}});
  ASSERT_EQ(C.rows(), 2u);
  ASSERT_EQ(C.cols(), 3u);
  EXPECT_EQ(C.at(0, 0), 1u);
  EXPECT_EQ(C.at(0, 1), 2u);
  EXPECT_EQ(C.at(0, 2), 3u);
  EXPECT_EQ(C.at(1, 0), 1u);
  EXPECT_EQ(C.at(1, 1), 4u);
  EXPECT_EQ(C.at(1, 2), 9u);
  EXPECT_THROW(build_vandermonde({17, 2, {8, 17, 1}}), Error);
}

TEST(Vandermonde, SpotEntriesAndFirstColumn) {
  const CompressionParams params{5000, 40, {8192, 65537, 1}};
  const auto C = build_vandermonde(params);
  std::mt19937_64 rng(1);
  for (std::size_t j = 0; j < params.s; ++j) EXPECT_EQ(C.at(j, 0), 1u);
  for (int k = 0; k < 500; ++k) {
    const std::size_t j = rng() % params.s, i = rng() % params.N;
    ASSERT_EQ(C.at(j, i), zp::mod_pow(i + 1, j + 1, params.he.p));
  }
}

TEST(MaskedMatrix, Examples) {
  const CompressionParams params{50, 6, {128, 257, 1}};
  const auto C = build_vandermonde(params);
  const std::vector<u64> ones(params.N, 1);
  EXPECT_EQ(precompute_masked_matrix(ones, params), C);

  std::mt19937_64 rng(2);
  std::vector<u64> db(params.N);
  for (auto& x : db) x = rng() % params.he.p;
  const auto D = precompute_masked_matrix(db, params);
  for (std::size_t i = 0; i < params.N; ++i) {
    for (std::size_t j = 0; j < params.s; ++j) ASSERT_EQ(D.at(j, i), C.at(j, i) * db[i] % params.he.p);
  }
}

TEST(Shape, BabyCountMinimizesRotations) {
  const auto shape = choose_shape({16384, 8, {8192, 65537, 3}});
  EXPECT_EQ(shape.period, 8u);
  EXPECT_EQ(shape.blocks, 4u);
  EXPECT_EQ(shape.baby * shape.giant, 8u);
  for (std::size_t b = 1; b <= 8; b *= 2) {
    EXPECT_LE(shape.blocks * (shape.baby - 1) + shape.giant, shape.blocks * (b - 1) + 8 / b);
  }
  const auto rot = required_rotations({16384, 8, {8192, 65537, 3}});
  EXPECT_TRUE(rot.column);
  EXPECT_TRUE(rot.has_row(8));
  EXPECT_TRUE(rot.has_row(2048));
  EXPECT_FALSE(rot.has_row(4096));
}

TEST(Bsgs, ShortMatrixTimesVector) {
  // 2 x 4 matrix, n = 8, one block per row.
  const CompressionParams params{4, 2, {8, 17, 3}};
  DenseMatrix M(2, 4);
  const u64 vals[2][4] = {{3, 1, 4, 1}, {5, 9, 2, 6}};
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t i = 0; i < 4; ++i) M.at(j, i) = vals[j][i];
  }
  const auto plan = BsgsPlan::build(params, M, M);
  const auto keys = Sim::keygen(params.he, required_rotations(params), 1);
  std::mt19937_64 rng(1);
  he::Evaluator<Sim> ev(keys);
  const std::vector<u64> x{2, 7, 1, 8};
  const auto cx = encrypt_vector<Sim>(x, keys, rng);
  const auto blocks = pack_pair<Sim>(ev, params, cx, std::nullopt);
  ASSERT_EQ(blocks.size(), 1u);
  const auto out = Sim::decrypt(bsgs_matvec<Sim>(ev, plan, blocks), keys);
  // 3*2 + 7 + 4 + 8 = 25 = 8, 10 + 63 + 2 + 48 = 123 = 4 (mod 17)
  EXPECT_EQ(out, he::SlotMatrix::from_rows(std::vector<u64>{8, 4, 0, 0}, std::vector<u64>{0, 0, 0, 0}));
}

TEST(Bsgs, IndicatorPicksColumn) {
  Rig<Sim> S({3000, 5, {2048, 65537, 3}}, 3);
  he::Evaluator<Sim> ev(S.keys);
  for (std::size_t i : {std::size_t{1}, std::size_t{1024}, std::size_t{1025}, std::size_t{2049}, std::size_t{3000}}) {
    std::vector<u64> v(S.params.N, 0);
    v[i - 1] = 1;
    const auto out = Sim::decrypt(comp_idx<Sim>(ev, S.plan, S.encrypt(v)), S.keys);
    EXPECT_EQ(out.at(0, 0), i);
    EXPECT_EQ(out.at(0, 1), i * i % 65537);
  }
  const auto zero = Sim::decrypt(comp_idx<Sim>(ev, S.plan, S.encrypt(std::vector<u64>(S.params.N, 0))), S.keys);
  EXPECT_EQ(zero, he::SlotMatrix(S.params.he.n));
}

TEST(Pack, TwoRowLayout) {
  const CompressionParams params{8, 2, {8, 17, 3}};
  const auto keys = Sim::keygen(params.he, required_rotations(params), 1);
  std::mt19937_64 rng(1);
  he::Evaluator<Sim> ev(keys);
  const auto cv = encrypt_vector<Sim>(std::vector<u64>(8, 1), keys, rng);
  const auto cd = encrypt_vector<Sim>(std::vector<u64>(8, 2), keys, rng);
  const auto blocks = pack_pair<Sim>(ev, params, cv, std::span<const Sim::Ciphertext>(cd));
  ASSERT_EQ(blocks.size(), 2u);
  const auto u = Sim::decrypt(blocks[0], keys);
  EXPECT_EQ(u, he::SlotMatrix::from_rows(std::vector<u64>{1, 1, 1, 1}, std::vector<u64>{2, 2, 2, 2}));

  const auto no_d = Sim::decrypt(pack_pair<Sim>(ev, params, cv, std::nullopt)[1], keys);
  EXPECT_EQ(no_d, he::SlotMatrix::from_rows(std::vector<u64>{1, 1, 1, 1}, std::vector<u64>{0, 0, 0, 0}));
}

TEST(Pack, UnpacksToHalves) {
  const CompressionParams params{16, 2, {8, 17, 3}};
  const auto keys = Sim::keygen(params.he, required_rotations(params), 1);
  std::mt19937_64 rng(2);
  he::Evaluator<Sim> ev(keys);
  std::vector<u64> v(16), d(16);
  for (std::size_t i = 0; i < 16; ++i) {
    v[i] = rng() % 17;
    d[i] = rng() % 17;
  }
  const auto cv = encrypt_vector<Sim>(v, keys, rng);
  const auto cd = encrypt_vector<Sim>(d, keys, rng);
  const auto blocks = pack_pair<Sim>(ev, params, cv, std::span<const Sim::Ciphertext>(cd));
  ASSERT_EQ(blocks.size(), 4u);
  for (std::size_t blk = 0; blk < 4; ++blk) {
    const auto u = Sim::decrypt(blocks[blk], keys);
    for (std::size_t t = 0; t < 4; ++t) {
      EXPECT_EQ(u.at(0, t), v[blk * 4 + t]);
      EXPECT_EQ(u.at(1, t), d[blk * 4 + t]);
    }
  }
}

TEST(CompIdx, SmallExampleAndDecomp) {
  Rig<Sim> S({4, 2, {8, 65537, 3}}, 4);
  he::Evaluator<Sim> ev(S.keys);
  const std::vector<u64> v{0, 1, 1, 0};
  const auto cw = comp_idx<Sim>(ev, S.plan, S.encrypt(v));
  const auto out = Sim::decrypt(cw, S.keys);
  EXPECT_EQ(out.at(0, 0), 5u);
  EXPECT_EQ(out.at(0, 1), 13u);
  const auto [I, dense] = decomp_idx<Sim>(cw, S.keys, S.params);
  EXPECT_EQ(I, zp::IndexSet({2, 3}));
  EXPECT_EQ(dense, v);

  const auto cz = comp_idx<Sim>(ev, S.plan, S.encrypt({0, 0, 0, 0}));
  const auto [Iz, dz] = decomp_idx<Sim>(cz, S.keys, S.params);
  EXPECT_TRUE(Iz.empty());
  EXPECT_EQ(dz, std::vector<u64>(4, 0));
}

TEST(CompIdx, RandomIndexSetsRoundTrip) {
  Rig<Sim> S({4096, 16, {2048, 65537, 3}}, 5);
  he::Evaluator<Sim> ev(S.keys);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = indicator_of(random_sparse(S.rng, S.params.N, S.rng() % 17, 65537));
    const auto cw = comp_idx<Sim>(ev, S.plan, S.encrypt(v));
    const auto out = Sim::decrypt(cw, S.keys);
    const auto w = power_sums_oracle(v, S.params.s, 65537);
    for (std::size_t j = 0; j < S.params.s; ++j) ASSERT_EQ(out.at(0, j), w[j]);
    ASSERT_EQ(decomp_idx<Sim>(cw, S.keys, S.params).second, v);
  }
}

TEST(PowerFermat, Examples) {
  const he::HeParams hp{8, 65537, 17};
  EXPECT_EQ(fermat_depth(65537), 16);
  EXPECT_EQ(fermat_depth(7681), 13);  // 7680 = 2^9 * 15
  const auto keys = Sim::keygen(hp, {}, 1);
  std::mt19937_64 rng(6);
  he::Evaluator<Sim> ev(keys);
  const auto cd = encrypt_vector<Sim>(std::vector<u64>{0, 4, 0, 0, 9, 65536, 0, 1}, keys, rng);
  const auto cv = power_fermat<Sim>(ev, cd);
  EXPECT_EQ(cv[0].level(), 17 - 16);
  EXPECT_EQ(Sim::decrypt(cv[0], keys).to_vector(), (std::vector<u64>{0, 1, 0, 0, 1, 1, 0, 1}));
  // Idempotent on 0/1 vectors.
  const auto bits = Sim::decrypt(cv[0], keys).to_vector();
  const auto again = power_fermat<Sim>(ev, encrypt_vector<Sim>(bits, keys, rng));
  EXPECT_EQ(Sim::decrypt(again[0], keys).to_vector(), bits);
}

TEST(PowerFermat, RandomMatchesCleartext) {
  const he::HeParams hp{64, 7681, 14};
  const auto keys = Sim::keygen(hp, {}, 2);
  std::mt19937_64 rng(7);
  he::Evaluator<Sim> ev(keys);
  std::vector<u64> d(64);
  for (auto& x : d) x = (rng() % 3 == 0) ? 0 : rng() % hp.p;
  const auto got = Sim::decrypt(power_fermat<Sim>(ev, encrypt_vector<Sim>(d, keys, rng))[0], keys).to_vector();
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(got[i], zp::mod_pow(d[i], hp.p - 1, hp.p));
}

TEST(Comp, SmallExample) {
  Rig<Sim> S({4, 2, {8, 65537, 3}}, 8);
  he::Evaluator<Sim> ev(S.keys);
  const std::vector<u64> d{0, 5, 7, 0};
  const auto cd = S.encrypt(d);
  const auto cv = S.encrypt(indicator_of(d));
  const auto ans = comp<Sim>(ev, S.plan, cd, std::span<const Sim::Ciphertext>(cv));
  ASSERT_EQ(ans.ciphertexts.size(), 1u);
  const auto [w, e] = open_answer<Sim>(ans, S.keys);
  EXPECT_EQ(w, (std::vector<u64>{5, 13}));
  EXPECT_EQ(e, (std::vector<u64>{31, 83}));
  EXPECT_EQ(decomp<Sim>(ans, S.keys, S.params), zp::SparseVector(4, {{2, 5}, {3, 7}}));
}

TEST(Comp, ZeroVectorAndSingleCiphertext) {
  Rig<Sim> S({20000, 16, {8192, 65537, 3}}, 10);
  he::Evaluator<Sim> ev(S.keys);
  const std::vector<u64> zero(S.params.N, 0);
  const auto cz = S.encrypt(zero);
  const auto ans = comp<Sim>(ev, S.plan, cz, std::span<const Sim::Ciphertext>(cz));
  ASSERT_EQ(ans.ciphertexts.size(), 1u);
  EXPECT_EQ(Sim::decrypt(ans.ciphertexts[0], S.keys), he::SlotMatrix(S.params.he.n));
  EXPECT_EQ(decomp<Sim>(ans, S.keys, S.params).nonzeros(), 0u);
}

TEST(Comp, LayoutIsExactlyTwoS) {
  Rig<Sim> S({5000, 12, {2048, 65537, 3}}, 11);
  he::Evaluator<Sim> ev(S.keys);
  const auto d = random_sparse(S.rng, S.params.N, 12, 65537);
  const auto cd = S.encrypt(d);
  const auto cv = S.encrypt(indicator_of(d));
  const auto out = Sim::decrypt(comp<Sim>(ev, S.plan, cd, std::span<const Sim::Ciphertext>(cv)).ciphertexts[0], S.keys);
  std::size_t used = 0;
  for (std::size_t row = 0; row < 2; ++row) {
    for (std::size_t t = 0; t < out.cols(); ++t) {
      if (t >= S.params.s) EXPECT_EQ(out.at(row, t), 0u);
      used += t < S.params.s;
    }
  }
  EXPECT_EQ(used, 2 * S.params.s);
}

TEST(Comp, RandomRoundTripProperty) {
  std::mt19937_64 rng(12);
  for (std::size_t s : {8, 16, 32, 64, 128}) {
    Rig<Sim> S({4096, s, {2048, 65537, 3}}, 100 + s);
    he::Evaluator<Sim> ev(S.keys);
    for (int trial = 0; trial < 200; ++trial) {
      const auto d = random_sparse(rng, S.params.N, rng() % (s + 1), 65537);
      const auto cd = S.encrypt(d);
      const auto cv = S.encrypt(indicator_of(d));
      const auto ans = comp<Sim>(ev, S.plan, cd, std::span<const Sim::Ciphertext>(cv));
      ASSERT_EQ(decomp<Sim>(ans, S.keys, S.params).to_dense(), d) << "s = " << s << " trial " << trial;
    }
  }
}

TEST(Comp, HintAndFermatPathsAgree) {
  Rig<Sim> S({3000, 8, {1024, 12289, 17}}, 13);
  he::Evaluator<Sim> ev(S.keys);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = random_sparse(S.rng, S.params.N, 1 + trial, 12289);
    const auto cd = S.encrypt(d);
    const auto cv = S.encrypt(indicator_of(d));
    const auto with_hint = comp<Sim>(ev, S.plan, cd, std::span<const Sim::Ciphertext>(cv));
    const auto without = comp<Sim>(ev, S.plan, cd);
    EXPECT_EQ(open_answer<Sim>(with_hint, S.keys), open_answer<Sim>(without, S.keys));
    EXPECT_EQ(decomp<Sim>(without, S.keys, S.params).to_dense(), d);
  }
}

TEST(Comp, UnpackedGivesTwoCiphertexts) {
  Rig<Sim> S({3000, 8, {1024, 12289, 3}}, 14);
  he::Evaluator<Sim> ev(S.keys);
  const auto d = random_sparse(S.rng, S.params.N, 8, 12289);
  const auto cd = S.encrypt(d);
  const auto cv = S.encrypt(indicator_of(d));
  const auto packed = comp<Sim>(ev, S.plan, cd, std::span<const Sim::Ciphertext>(cv));
  const auto unpacked = comp<Sim>(ev, S.plan, cd, std::span<const Sim::Ciphertext>(cv), false);
  ASSERT_EQ(unpacked.ciphertexts.size(), 2u);
  EXPECT_FALSE(unpacked.layout.packed);
  EXPECT_EQ(open_answer<Sim>(packed, S.keys), open_answer<Sim>(unpacked, S.keys));
  EXPECT_EQ(decomp<Sim>(unpacked, S.keys, S.params).to_dense(), d);
}

TEST(Comp, MaskedMatrixSkipsMask) {
  const CompressionParams params{3000, 8, {1024, 12289, 3}};
  std::mt19937_64 rng(15);
  std::vector<u64> db(params.N);
  for (auto& x : db) x = 1 + rng() % (params.he.p - 1);
  const auto C = build_vandermonde(params);
  const auto plan = BsgsPlan::build(params, C, precompute_masked_matrix(db, params));
  const auto keys = Sim::keygen(params.he, required_rotations(params), 15);
  he::Evaluator<Sim> ev(keys);
  const auto v = indicator_of(random_sparse(rng, params.N, 8, 2));
  std::vector<u64> masked(params.N);
  for (std::size_t i = 0; i < params.N; ++i) masked[i] = v[i] * db[i];
  const auto ans = comp_masked<Sim>(ev, plan, encrypt_vector<Sim>(v, keys, rng));
  const auto [w, e] = open_answer<Sim>(ans, keys);
  EXPECT_EQ(w, power_sums_oracle(v, params.s, params.he.p));
  EXPECT_EQ(e, power_sums_oracle(masked, params.s, params.he.p));
  EXPECT_EQ(decomp<Sim>(ans, keys, params).to_dense(), masked);
}

TEST(Counters, KeySwitchesAndPlaintextMultsScale) {
  auto measure = [](std::size_t N, std::size_t s) {
    Rig<Sim> S({N, s, {2048, 65537, 3}}, 16);
    he::Evaluator<Sim> ev(S.keys);
    const auto cd = S.encrypt(std::vector<u64>(N, 0));
    comp<Sim>(ev, S.plan, cd, std::span<const Sim::Ciphertext>(cd));
    return ev.counters();
  };
  std::vector<std::uint64_t> ks;
  for (std::size_t s : {8, 16, 32, 64, 128}) ks.push_back(measure(16384, s).keyswitches);
  for (std::size_t k = 1; k < ks.size(); ++k) EXPECT_GE(ks[k], ks[k - 1]);
  EXPECT_LE(static_cast<double>(ks.back()) / static_cast<double>(ks.front()), 6.0);

  // Two masks per packed block, one diagonal per block and shift, one output mask.
  for (std::size_t N : {1024, 3000, 8192}) {
    const CompressionParams params{N, 16, {2048, 65537, 3}};
    EXPECT_EQ(measure(N, 16).pt_mults, params.blocks() * (16 + 2) + 1) << N;
  }
}

TEST(Decomp, OpCountsIndependentOfN) {
  std::vector<u64> planted(1 << 13, 0);
  std::mt19937_64 rng(17);
  for (auto i : {3, 77, 500, 1001, 2048, 4095, 5000, 8000}) planted[i] = 1 + rng() % 65536;
  std::optional<zp::OpCount> reference;
  for (std::size_t N = 1 << 13; N <= (1 << 15); N *= 2) {
    const CompressionParams params{N, 16, {2048, 65537, 3}};
    std::vector<u64> d(N, 0);
    std::copy(planted.begin(), planted.end(), d.begin());
    const auto w = power_sums_oracle(indicator_of(d), 16, 65537);
    const auto e = power_sums_oracle(d, 16, 65537);
    zp::OpCount ops;
    EXPECT_EQ(decomp_payload(w, e, params, &ops).to_dense(), d);
    if (reference) EXPECT_EQ(ops, *reference);
    reference = ops;
  }
}

TEST(Comp, BgvMatchesSimulator) {
  const CompressionParams params{300, 4, {256, 7681, 3}};
  Rig<Bgv> B(params, 18);
  Rig<Sim> S(params, 18);
  he::Evaluator<Bgv> eb(B.keys);
  he::Evaluator<Sim> es(S.keys);
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = random_sparse(rng, params.N, rng() % 5, params.he.p);
    const auto v = indicator_of(d);
    const auto cdb = B.encrypt(d);
    const auto cvb = B.encrypt(v);
    const auto ab = comp<Bgv>(eb, B.plan, cdb, std::span<const Bgv::Ciphertext>(cvb));
    const auto cds = S.encrypt(d);
    const auto cvs = S.encrypt(v);
    const auto as = comp<Sim>(es, S.plan, cds, std::span<const Sim::Ciphertext>(cvs));
    EXPECT_EQ(Bgv::decrypt(ab.ciphertexts[0], B.keys), Sim::decrypt(as.ciphertexts[0], S.keys));
    EXPECT_EQ(decomp<Bgv>(ab, B.keys, params).to_dense(), d);
  }
  EXPECT_EQ(eb.counters(), es.counters());
}

TEST(Comp, BgvFermatPath) {
  // 257 - 1 = 2^8: eight squarings, then the three hint-path levels.
  const CompressionParams params{200, 4, {128, 257, 11}};
  Rig<Bgv> B(params, 20);
  he::Evaluator<Bgv> ev(B.keys);
  const auto d = random_sparse(B.rng, params.N, 4, params.he.p);
  const auto ans = comp<Bgv>(ev, B.plan, B.encrypt(d));
  EXPECT_EQ(ans.ciphertexts[0].level(), 0);
  EXPECT_EQ(decomp<Bgv>(ans, B.keys, params).to_dense(), d);
}

TEST(Comp, OverflowIsDetected) {
  Rig<Sim> S({2000, 4, {1024, 12289, 3}}, 21);
  he::Evaluator<Sim> ev(S.keys);
  int detected = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_sparse(S.rng, S.params.N, 5 + trial % 3, 12289);
    const auto cd = S.encrypt(d);
    const auto cv = S.encrypt(indicator_of(d));
    const auto ans = comp<Sim>(ev, S.plan, cd, std::span<const Sim::Ciphertext>(cv));
    try {
      const auto got = decomp<Sim>(ans, S.keys, S.params);
      EXPECT_NE(got.to_dense(), d);
    } catch (const Error& e) {
      ++detected;
    }
  }
  EXPECT_GE(detected, 45);
}

}  // namespace
}  // namespace hcpdq::homcomp
