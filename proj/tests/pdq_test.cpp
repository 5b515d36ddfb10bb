#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <numeric>
#include <fstream>
#include <random>
#include <sstream>

#include "hcpdq/bgv/bgv.hpp"
#include "hcpdq/he/simulator.hpp"
#include "hcpdq/pdq/protocol.hpp"

namespace hcpdq::pdq {
namespace {

using Sim = he::sim::Backend;
using Ct = Sim::Ciphertext;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::kProtocol;
}

Database toy() { return Database({{10, 4}, {20, 5}, {20, 7}, {30, 3}}); }

// Random table with `hits` records keyed x, the rest keyed elsewhere.
Database planted(std::mt19937_64& rng, std::size_t N, std::size_t hits, u64 x, u64 p) {
  std::vector<Record> recs(N);
  for (auto& r : recs) {
    do {
      r.key = rng() % p;
    } while (r.key == x);
    r.value = 1 + rng() % (p - 1);
  }
  std::vector<std::size_t> pos(N);
  std::iota(pos.begin(), pos.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng);
  for (std::size_t k = 0; k < hits; ++k) recs[pos[k]].key = x;
  return Database(std::move(recs));
}

struct Party {
  ClientState<Sim> client;
  Sim::KeySet server_keys;
  homcomp::BsgsPlan plan;
  std::mt19937_64 rng;

  Party(std::size_t N, std::size_t s, std::size_t n, u64 p, std::uint64_t seed)
      : client(make_client<Sim>(pdq_params(N, s, n, p), seed)),
        server_keys(client.keys.public_part()),
        plan(make_plan(client.params)),
        rng(seed) {}

  PdqResult run(const Database& db, u64 x) {
    const auto q = query<Sim>(x, client, rng);
    he::Evaluator<Sim> ev(server_keys);
    return recover<Sim>(answer<Sim>(ev, plan, q, db), client);
  }
};

TEST(Database, Validation) {
  EXPECT_NO_THROW(toy().validate(65537));
  EXPECT_EQ(code_of([] { Database({{1, 0}}).validate(17); }), Errc::kInvalidParams);
  EXPECT_EQ(code_of([] { Database({{17, 1}}).validate(17); }), Errc::kInvalidParams);
  EXPECT_EQ(code_of([] { Database({{1, 17}}).validate(17); }), Errc::kInvalidParams);
  EXPECT_EQ(code_of([] { Database(std::vector<Record>(17, {1, 1})).validate(17); }), Errc::kModulusTooSmall);
  EXPECT_NO_THROW(Database(std::vector<Record>(16, {1, 1})).validate(17));
  EXPECT_EQ(code_of([] { Database().validate(17); }), Errc::kInvalidParams);
}

TEST(Database, JsonLines) {
  std::stringstream ss;
  toy().write_jsonl(ss);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), R"({"key":10,"value":4})");
  EXPECT_EQ(Database::read_jsonl(ss), toy());

  std::istringstream blank("{\"key\": 1, \"value\": 2}\n\n  \n{\"value\": 3, \"key\": 4}\n");
  EXPECT_EQ(Database::read_jsonl(blank), Database({{1, 2}, {4, 3}}));
  std::istringstream bad("{\"key\": 1}\n");
  EXPECT_EQ(code_of([&] { Database::read_jsonl(bad); }), Errc::kFormat);
}

TEST(Database, Hcdb) {
  const auto bytes = toy().to_hcdb();
  ASSERT_EQ(bytes.size(), 4 + 2 + 8 + 16 * 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "HCDB");
  EXPECT_EQ(bytes[14], 10);  // first key, little-endian
  EXPECT_EQ(Database::from_hcdb(bytes), toy());
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{13}, bytes.size() - 1}) {
    EXPECT_EQ(code_of([&] { Database::from_hcdb(std::span(bytes).first(cut)); }), Errc::kFormat) << cut;
  }
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_EQ(code_of([&] { Database::from_hcdb(longer); }), Errc::kFormat);
}

TEST(Database, LoadDetectsFormat) {
  const auto dir = std::filesystem::temp_directory_path() / "hcpdq_db_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "a.jsonl") << "{\"key\":10,\"value\":4}\n{\"key\":20,\"value\":5}\n";
    const auto b = toy().to_hcdb();
    std::ofstream(dir / "b.bin", std::ios::binary).write(reinterpret_cast<const char*>(b.data()),
                                                          static_cast<std::streamsize>(b.size()));
  }
  EXPECT_EQ(Database::load((dir / "a.jsonl").string()), Database({{10, 4}, {20, 5}}));
  EXPECT_EQ(Database::load((dir / "b.bin").string()), toy());
  EXPECT_EQ(code_of([&] { Database::load((dir / "missing").string()); }), Errc::kIo);
  std::filesystem::remove_all(dir);
}

TEST(Levels, Budget) {
  EXPECT_EQ(match_depth(65537), 17);
  EXPECT_EQ(required_levels(65537), 21);
  EXPECT_EQ(required_levels_masked(65537), 20);
  EXPECT_EQ(pdq_params(4, 2, 8, 65537).he.max_level, 21);
}

TEST(Query, ReplicatesCondition) {
  auto st = make_client<Sim>(pdq_params(4, 2, 8, 65537), 1);
  std::mt19937_64 rng(1);
  const auto q = query<Sim>(42, st, rng);
  EXPECT_EQ(Sim::decrypt(q.condition, st.keys), he::SlotMatrix(8, 42));
  EXPECT_EQ(q.predicate, Predicate::kExactMatch);
  EXPECT_EQ(q.post, PostFn::kIdentity);
  EXPECT_EQ(st.x, 42u);
  EXPECT_EQ(code_of([&] { query<Sim>(65537, st, rng); }), Errc::kInvalidParams);
}

TEST(Match, Examples) {
  const auto params = pdq_params(4, 2, 8, 65537);
  auto st = make_client<Sim>(params, 2);
  std::mt19937_64 rng(2);
  he::Evaluator<Sim> ev(st.keys);
  auto v_for = [&](const Database& db, u64 x) {
    const auto q = query<Sim>(x, st, rng);
    return Sim::decrypt(match_exact<Sim>(ev, q.condition, db, params)[0], st.keys).to_vector();
  };
  EXPECT_EQ(v_for(Database({{10, 1}, {20, 1}, {20, 1}, {30, 1}}), 20), (std::vector<u64>{0, 1, 1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(v_for(toy(), 99), std::vector<u64>(8, 0));
  EXPECT_EQ(v_for(Database({{0, 1}, {0, 1}, {0, 1}, {0, 1}}), 0), (std::vector<u64>{1, 1, 1, 1, 0, 0, 0, 0}));
  EXPECT_EQ(v_for(Database({{0, 1}, {5, 1}, {0, 1}, {9, 1}}), 5), (std::vector<u64>{0, 1, 0, 0, 0, 0, 0, 0}));

  const auto q = query<Sim>(20, st, rng);
  EXPECT_EQ(match_exact<Sim>(ev, q.condition, toy(), params)[0].level(), 21 - 17);
}

TEST(Match, RandomAgainstCleartextPredicate) {
  const auto params = pdq_params(3000, 8, 1024, 12289);
  auto st = make_client<Sim>(params, 3);
  std::mt19937_64 rng(3);
  he::Evaluator<Sim> ev(st.keys);
  std::vector<Record> recs(params.N);
  for (auto& r : recs) r = {rng() % 20, 1 + rng() % 100};
  const Database db(recs);
  for (u64 x = 0; x < 21; ++x) {
    const auto q = query<Sim>(x, st, rng);
    const auto cv = match_exact<Sim>(ev, q.condition, db, params);
    const auto v = homcomp::decrypt_vector<Sim>(cv, cv.size() * params.he.n, st.keys);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(v[i], i < db.size() && db[i].key == x ? 1u : 0u);
  }
}

TEST(Mask, Examples) {
  const auto params = pdq_params(4, 2, 8, 65537);
  auto st = make_client<Sim>(params, 4);
  std::mt19937_64 rng(4);
  he::Evaluator<Sim> ev(st.keys);
  const Database db({{1, 7}, {1, 8}, {1, 9}, {1, 3}});
  auto d_for = [&](std::vector<u64> v) {
    const auto cv = homcomp::encrypt_vector<Sim>(v, st.keys, rng);
    return Sim::decrypt(mask<Sim>(ev, cv, db, params)[0], st.keys).to_vector();
  };
  EXPECT_EQ(d_for({0, 1, 1, 0}), (std::vector<u64>{0, 8, 9, 0, 0, 0, 0, 0}));
  EXPECT_EQ(d_for({0, 0, 0, 0}), std::vector<u64>(8, 0));
  EXPECT_EQ(code_of([&] { mask<Sim>(ev, {}, db, params); }), Errc::kInvalidParams);
}

TEST(Answer, ToyExample) {
  Party P(4, 2, 8, 65537, 5);
  const auto r = P.run(toy(), 20);
  EXPECT_EQ(r, (PdqResult{{{2, 5}, {3, 7}}}));
  EXPECT_EQ(r.to_json().dump(), R"({"matches":[[2,5],[3,7]]})");
  EXPECT_TRUE(P.run(toy(), 11).matches.empty());
  EXPECT_EQ(P.run(toy(), 30), (PdqResult{{{4, 3}}}));
}

TEST(Answer, SixteenPlantedMatchesAtFullSize) {
  Party P(8192, 16, 8192, 65537, 6);
  const auto db = planted(P.rng, 8192, 16, 777, 65537);
  const auto r = P.run(db, 777);
  EXPECT_EQ(r.matches.size(), 16u);
  EXPECT_EQ(r, evaluate_cleartext(db, 777));
}

TEST(Answer, OverflowRaises) {
  Party P(4000, 8, 2048, 65537, 7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto db = planted(P.rng, 4000, 9 + trial % 4, 5, 65537);
    EXPECT_EQ(code_of([&] { P.run(db, 5); }), Errc::kQueryOverflow) << trial;
  }
}

TEST(Answer, RandomInstances) {
  Party P(3000, 8, 1024, 12289, 8);
  for (int trial = 0; trial < 60; ++trial) {
    const auto hits = P.rng() % 9;
    const u64 x = P.rng() % 12289;
    const auto db = planted(P.rng, 3000, hits, x, 12289);
    ASSERT_EQ(P.run(db, x), evaluate_cleartext(db, x)) << trial;
  }
}

TEST(Answer, HintReuseMatchesFermatPath) {
  const auto params = pdq_params(3000, 8, 1024, 12289);
  auto full = params;
  full.he.max_level += homcomp::fermat_depth(params.he.p);
  auto st = make_client<Sim>(full, 9);
  std::mt19937_64 rng(9);
  he::Evaluator<Sim> ev(st.keys);
  const auto plan = make_plan(full);
  const auto db = planted(rng, 3000, 6, 4, 12289);
  const auto q = query<Sim>(4, st, rng);
  const auto with_hint = answer<Sim>(ev, plan, q, db);
  const auto cd = mask<Sim>(ev, match<Sim>(ev, q, db, full), db, full);
  const auto hintless = homcomp::comp<Sim>(ev, plan, cd);
  EXPECT_EQ(homcomp::open_answer<Sim>(with_hint, st.keys), homcomp::open_answer<Sim>(hintless, st.keys));
}

TEST(Answer, MaskedMatrixVariant) {
  Party P(3000, 8, 1024, 12289, 10);
  const auto db = planted(P.rng, 3000, 7, 100, 12289);
  const auto plan = make_masked_plan(P.client.params, db);
  const auto q = query<Sim>(100, P.client, P.rng);
  he::Evaluator<Sim> ev(P.server_keys);
  const auto ans = answer_masked<Sim>(ev, plan, q, db);
  EXPECT_EQ(ans.ciphertexts[0].level(), P.client.params.he.max_level - required_levels_masked(12289));
  EXPECT_EQ(recover<Sim>(ans, P.client), evaluate_cleartext(db, 100));

  he::Evaluator<Sim> ev2(P.server_keys);
  EXPECT_EQ(homcomp::open_answer<Sim>(answer<Sim>(ev2, P.plan, q, db), P.client.keys),
            homcomp::open_answer<Sim>(ans, P.client.keys));
}

TEST(Answer, ErrorPaths) {
  Party P(4, 2, 8, 65537, 11);
  auto q = query<Sim>(20, P.client, P.rng);
  he::Evaluator<Sim> ev(P.server_keys);
  EXPECT_EQ(code_of([&] { answer<Sim>(ev, P.plan, q, Database({{1, 1}})); }), Errc::kInvalidParams);
  q.post = static_cast<PostFn>(9);
  EXPECT_EQ(code_of([&] { answer<Sim>(ev, P.plan, q, toy()); }), Errc::kProtocol);
  q.post = PostFn::kIdentity;
  q.predicate = static_cast<Predicate>(9);
  EXPECT_EQ(code_of([&] { answer<Sim>(ev, P.plan, q, toy()); }), Errc::kProtocol);

  // Too few levels for the pipeline.
  auto st = make_client<Sim>({4, 2, {8, 65537, 20}}, 12);
  const auto q2 = query<Sim>(20, st, P.rng);
  he::Evaluator<Sim> ev2(st.keys);
  EXPECT_EQ(code_of([&] { answer<Sim>(ev2, make_plan(st.params), q2, toy()); }), Errc::kLevelExhausted);
}

TEST(Answer, BgvEndToEndSmallPrime) {
  // 257 - 1 = 2^8, so the whole pipeline fits a short chain.
  const auto params = pdq_params(200, 4, 128, 257);
  auto st = make_client<bgv::Backend>(params, 13);
  const auto pub = st.keys.public_part();
  std::mt19937_64 rng(13);
  const auto plan = make_plan(params);
  for (int trial = 0; trial < 3; ++trial) {
    const u64 x = 1 + rng() % 256;
    const auto db = planted(rng, 200, trial + 2, x, 257);
    const auto q = query<bgv::Backend>(x, st, rng);
    he::Evaluator<bgv::Backend> ev(pub);
    EXPECT_EQ(recover<bgv::Backend>(answer<bgv::Backend>(ev, plan, q, db), st), evaluate_cleartext(db, x));
  }
}

}  // namespace
}  // namespace hcpdq::pdq
