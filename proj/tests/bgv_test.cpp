#include <gtest/gtest.h>

#include <random>

#include "hcpdq/bgv/bgv.hpp"
#include "hcpdq/he/simulator.hpp"

namespace hcpdq::bgv {
namespace {

// Schoolbook product mod (X^n + 1, q).
std::vector<u64> negacyclic(const std::vector<u64>& a, const std::vector<u64>& b, const Modulus& q) {
  const std::size_t n = a.size();
  std::vector<u64> c(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const u64 t = q.mul(a[i], b[j]);
      if (i + j < n) {
        c[i + j] = q.add(c[i + j], t);
      } else {
        c[i + j - n] = q.sub(c[i + j - n], t);
      }
    }
  }
  return c;
}

he::SlotMatrix random_slots(std::size_t n, u64 p, std::mt19937_64& rng) {
  he::SlotMatrix m(n);
  for (auto& x : m.values()) x = rng() % p;
  return m;
}

TEST(Ntt, SquareOfOnePlusX) {
  const Modulus q(17);  // 17 = 1 mod 8
  const NttTables t(4, q);
  std::vector<u64> a{1, 1, 0, 0};
  t.forward(a);
  for (auto& x : a) x = q.mul(x, x);
  t.inverse(a);
  EXPECT_EQ(a, (std::vector<u64>{1, 2, 1, 0}));
}

TEST(Ntt, ZeroMapsToZero) {
  const Modulus q(7681);
  const NttTables t(16, q);
  std::vector<u64> a(16, 0);
  t.forward(a);
  EXPECT_EQ(a, std::vector<u64>(16, 0));
}

TEST(Ntt, RoundTripAndConvolution) {
  std::mt19937_64 rng(1);
  for (std::size_t n : {std::size_t{16}, std::size_t{1024}, std::size_t{4096}}) {
    const Modulus q(1152921504606830593ULL);  // 2^60 - 2^14 + 1, 1 mod 2^14
    ASSERT_TRUE(is_prime(q.value()));
    const NttTables t(n, q);
    std::vector<u64> a(n), b(n);
    for (auto& x : a) x = rng() % q.value();
    for (auto& x : b) x = rng() % q.value();

    auto r = a;
    t.forward(r);
    t.inverse(r);
    EXPECT_EQ(r, a);

    if (n > 1024) continue;  // schoolbook is quadratic
    auto fa = a, fb = b;
    t.forward(fa);
    t.forward(fb);
    for (std::size_t k = 0; k < n; ++k) fa[k] = q.mul(fa[k], fb[k]);
    t.inverse(fa);
    EXPECT_EQ(fa, negacyclic(a, b, q));
  }
}

TEST(Ntt, NaturalOrderEvaluation) {
  const Modulus q(7681);
  const std::size_t n = 16;
  const NttTables t(n, q);
  const u64 psi = find_primitive_root(n, q);
  std::vector<u64> a(n);
  for (std::size_t k = 0; k < n; ++k) a[k] = (k * 37 + 5) % q.value();
  auto f = a;
  t.forward(f);
  for (std::size_t i = 0; i < n; ++i) {
    const u64 x = q.pow(psi, 2 * i + 1);
    u64 acc = 0;
    for (std::size_t k = n; k-- > 0;) acc = q.add(q.mul(acc, x), a[k]);
    EXPECT_EQ(f[i], acc);
  }
}

TEST(SlotEncoder, RoundTripAndProducts) {
  std::mt19937_64 rng(2);
  const std::size_t n = 1024;
  const u64 p = 12289;
  const SlotEncoder enc(n, p);
  const Modulus pm(p);
  const auto x = random_slots(n, p, rng);
  const auto y = random_slots(n, p, rng);
  EXPECT_EQ(enc.decode(enc.encode(x)), x);

  std::vector<u64> ex = enc.encode(x), ey = enc.encode(y);
  // Ring product via schoolbook must decode to the Hadamard product.
  EXPECT_EQ(enc.decode(negacyclic(ex, ey, pm)), he::slots::mul(x, y, pm));
}

TEST(SlotEncoder, AutomorphismsRealizeRotations) {
  std::mt19937_64 rng(3);
  const std::size_t n = 256;
  const u64 p = 7681;
  const SlotEncoder enc(n, p);
  const Modulus pm(p);
  const auto x = random_slots(n, p, rng);
  const auto coeffs = enc.encode(x);
  std::vector<u64> out(n);
  for (std::size_t r : {std::size_t{1}, std::size_t{2}, std::size_t{7}, std::size_t{64}, std::size_t{127}}) {
    apply_automorphism(coeffs, out, galois_for_rotation(r, n), pm);
    EXPECT_EQ(enc.decode(out), he::slots::rotate_rows(x, r)) << "r = " << r;
  }
  apply_automorphism(coeffs, out, galois_for_row_swap(n), pm);
  EXPECT_EQ(enc.decode(out), he::slots::swap_rows(x));
}

TEST(Context, ChainPrimes) {
  const auto ctx = Context::create(he::HeParams{1024, 12289, 3});
  const auto chain = ctx->chain();
  ASSERT_EQ(chain.size(), 4u);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    EXPECT_TRUE(is_prime(chain[i]));
    EXPECT_EQ(chain[i] % (2 * 1024 * 12289), 1u);
    EXPECT_LT(chain[i], u64{1} << 58);
    if (i > 0) EXPECT_GT(chain[i], chain[i - 1]);
  }
}

TEST(Context, NoNttPrimes) {
  // 2n p exceeds the prime size bound.
  try {
    Context::create(he::HeParams{8192, 70368744210433ULL, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNoNttPrimes);
  }
}

TEST(Bgv, KeygenSmoke) {
  std::mt19937_64 rng(4);
  for (const auto& params : {he::HeParams{4096, 65537, 3}, he::HeParams{1024, 12289, 2}}) {
    const auto keys = Backend::keygen(params, {}, 5);
    const auto m = random_slots(params.n, params.p, rng);
    const auto c = Backend::encrypt(m, keys, rng);
    EXPECT_EQ(c.level(), params.max_level);
    EXPECT_EQ(Backend::decrypt(c, keys), m);
  }
}

TEST(Bgv, FullSizeRingWithBsgsKeys) {
  const he::HeParams params{8192, 65537, 3};
  const auto keys = Backend::keygen(params, {{1, 2, 3, 4, 8, 16}, true}, 6);
  EXPECT_EQ(keys.galois.size(), 7u);
  std::mt19937_64 rng(7);
  const auto m = random_slots(params.n, params.p, rng);
  const auto c = Backend::rot_row(Backend::encrypt(m, keys, rng), 16, keys);
  EXPECT_EQ(Backend::decrypt(c, keys), he::slots::rotate_rows(m, 16));
}

TEST(Bgv, ErrorContracts) {
  const he::HeParams params{256, 7681, 1};
  const auto keys = Backend::keygen(params, {{1}, false}, 8);
  const auto other = Backend::keygen(params, {{1}, false}, 9);
  std::mt19937_64 rng(10);
  const auto m = random_slots(params.n, params.p, rng);
  const auto c = Backend::encrypt(m, keys, rng);

  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::kFormat;
  };
  EXPECT_EQ(code_of([&] { Backend::decrypt(c, other); }), Errc::kBackendMismatch);
  EXPECT_EQ(code_of([&] { Backend::rot_row(c, 2, keys); }), Errc::kMissingRotationKey);
  EXPECT_EQ(code_of([&] { Backend::rot_col(c, keys); }), Errc::kMissingRotationKey);
  EXPECT_EQ(code_of([&] { Backend::decrypt(c, keys.public_part()); }), Errc::kMissingSecretKey);
  const auto low = Backend::mul(c, c, keys);
  EXPECT_EQ(code_of([&] { Backend::mul(low, low, keys); }), Errc::kLevelExhausted);
  EXPECT_EQ(code_of([&] { Backend::keygen(params, {{128}, false}, 1); }), Errc::kInvalidParams);

  const Ciphertext noisy(c.level(), c.key_id(), c.c0(), c.c1(), 200.0);
  EXPECT_EQ(code_of([&] { Backend::mul_plain(noisy, m, keys); }), Errc::kNoiseOverflow);
}

TEST(Bgv, DecryptAfterModswitchDescent) {
  const he::HeParams params{1024, 12289, 3};
  const auto keys = Backend::keygen(params, {}, 11);
  std::mt19937_64 rng(12);
  const auto m = random_slots(params.n, params.p, rng);
  const auto c = Backend::encrypt(m, keys, rng);
  for (int level = params.max_level; level >= 0; --level) {
    const auto low = Backend::modswitch_to(c, level, *keys.ctx);
    EXPECT_EQ(low.level(), level);
    EXPECT_EQ(Backend::decrypt(low, keys), m);
    EXPECT_LT(low.noise_log2(), keys.ctx->log2_modulus(level) - 1);
  }
}

TEST(Bgv, SecretAndPublicPartsSplit) {
  const he::HeParams params{256, 7681, 2};
  const auto keys = Backend::keygen(params, {{1}, true}, 13);
  const auto pub = keys.public_part();
  const auto sec = keys.secret_part();
  EXPECT_FALSE(pub.has_secret());
  EXPECT_TRUE(pub.has_public());
  EXPECT_TRUE(sec.has_secret());
  EXPECT_FALSE(sec.has_public());
  std::mt19937_64 rng(14);
  const auto m = random_slots(params.n, params.p, rng);
  const auto c = Backend::rot_col(Backend::encrypt(m, pub, rng), pub);
  EXPECT_EQ(Backend::decrypt(c, sec), he::slots::swap_rows(m));
}

// Simulator oracle on random depth-3 DAGs at n = 2^12.
TEST(Bgv, AgreesWithSimulatorOnRandomDags) {
  const he::HeParams params{4096, 65537, 3};
  const he::RotationSet rot{{1, 7}, true};
  const auto keys = Backend::keygen(params, rot, 15);
  const auto sim_keys = he::sim::Backend::keygen(params, rot, 15);
  const Modulus p(params.p);
  std::mt19937_64 rng(16);
  for (int dag = 0; dag < 500; ++dag) {
    const auto x = random_slots(params.n, params.p, rng);
    const auto y = random_slots(params.n, params.p, rng);
    auto c = Backend::encrypt(x, keys, rng);
    auto s = he::sim::Backend::encrypt(x, sim_keys, rng);
    const auto cy = Backend::encrypt(y, keys, rng);
    const auto sy = he::sim::Backend::encrypt(y, sim_keys, rng);
    for (int step = 0; step < 6; ++step) {
      const auto op = rng() % 5;
      if (op == 0 && c.level() > 0) {
        c = Backend::mul(c, cy, keys);
        s = he::sim::Backend::mul(s, sy, sim_keys);
      } else if (op == 1 && c.level() > 0) {
        c = Backend::mul_plain(c, y, keys);
        s = he::sim::Backend::mul_plain(s, y, sim_keys);
      } else if (op == 2) {
        c = Backend::rot_row(c, 7, keys);
        s = he::sim::Backend::rot_row(s, 7, sim_keys);
      } else if (op == 3) {
        c = Backend::rot_col(c, keys);
        s = he::sim::Backend::rot_col(s, sim_keys);
      } else {
        c = Backend::add(c, cy, keys);
        s = he::sim::Backend::add(s, sy, sim_keys);
      }
      ASSERT_EQ(c.level(), s.level());
    }
    ASSERT_EQ(Backend::decrypt(c, keys), he::sim::Backend::decrypt(s, sim_keys)) << "dag " << dag;
  }
}

}  // namespace
}  // namespace hcpdq::bgv
