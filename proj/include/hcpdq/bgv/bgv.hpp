#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hcpdq/bgv/context.hpp"
#include "hcpdq/he/evaluator.hpp"

namespace hcpdq::bgv {

// Key-switching key from s' to s: for every (limb i, digit j) a pair
//   b_ij = -a_ij * s + p * e_ij + g_ij * s',   a_ij
// where g_ij has residue 2^(w j) mod q_i and 0 mod every other chain prime.
// Stored in NTT form over the full chain; lower levels use a prefix of the
// limbs. The a_ij are expanded from a seed.
struct SwitchingKey {
  u64 a_seed = 0;
  std::vector<RnsPoly> b;
  std::vector<RnsPoly> a;

  friend bool operator==(const SwitchingKey& x, const SwitchingKey& y) {
    return x.a_seed == y.a_seed && x.b == y.b;
  }
};

inline std::vector<RnsPoly> expand_uniform(const Context& ctx, u64 seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<RnsPoly> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(sample::uniform(ctx, ctx.prime_count(), rng));
  return out;
}

struct KeySet {
  std::shared_ptr<const Context> ctx;
  u64 key_id = 0;
  he::RotationSet rotation_set;

  // Secret: ternary coefficients and their NTT image over the chain.
  std::vector<i64> secret;
  RnsPoly secret_ntt;

  bool has_public_key = false;
  RnsPoly pk_b;
  u64 pk_a_seed = 0;
  RnsPoly pk_a;
  SwitchingKey relin;
  std::map<u64, SwitchingKey> galois;  // by Galois element

  const he::HeParams& params() const { return ctx->params(); }
  const he::RotationSet& rotations() const noexcept { return rotation_set; }
  bool has_secret() const noexcept { return !secret.empty(); }
  bool has_public() const noexcept { return has_public_key; }

  KeySet public_part() const {
    KeySet k = *this;
    k.secret.clear();
    k.secret_ntt = {};
    return k;
  }
  KeySet secret_part() const {
    KeySet k;
    k.ctx = ctx;
    k.key_id = key_id;
    k.secret = secret;
    k.secret_ntt = secret_ntt;
    return k;
  }

  // Rebuilds the seeded and derived parts after deserialization.
  void restore_derived() {
    if (has_secret()) {
      secret_ntt = ctx->lift_signed(secret, ctx->prime_count());
      ctx->to_ntt(secret_ntt);
    }
    if (has_public_key) {
      std::mt19937_64 rng(pk_a_seed);
      pk_a = sample::uniform(*ctx, ctx->prime_count(), rng);
      const std::size_t count = ctx->prime_count() * ctx->digits_per_limb();
      relin.a = expand_uniform(*ctx, relin.a_seed, count);
      for (auto& [g, key] : galois) key.a = expand_uniform(*ctx, key.a_seed, count);
    }
  }
};

// (c0, c1) in coefficient form over q_0 ... q_level with
// c0 + c1 s = m + p e (mod Q_level). `noise_log2` bounds log2 |m + p e|.
class Ciphertext {
 public:
  Ciphertext() = default;
  Ciphertext(int level, u64 key_id, RnsPoly c0, RnsPoly c1, double noise_log2)
      : level_(level), key_id_(key_id), c0_(std::move(c0)), c1_(std::move(c1)), noise_log2_(noise_log2) {}

  static constexpr he::BackendId backend() noexcept { return he::BackendId::kBgvMini; }
  int level() const noexcept { return level_; }
  u64 key_id() const noexcept { return key_id_; }
  const RnsPoly& c0() const noexcept { return c0_; }
  const RnsPoly& c1() const noexcept { return c1_; }
  double noise_log2() const noexcept { return noise_log2_; }

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;

 private:
  friend struct Backend;
  int level_ = 0;
  u64 key_id_ = 0;
  RnsPoly c0_, c1_;
  double noise_log2_ = 0;
};

namespace detail {

inline double log2_add(double a, double b) {
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

inline constexpr double kErrorStddev = 3.2403703492039302;  // sqrt(21 / 2)

inline void mul_ntt_into(RnsPoly& acc, const RnsPoly& a, const RnsPoly& b, const Context& ctx) {
  for (std::size_t i = 0; i < acc.limbs; ++i) {
    const auto& q = ctx.prime(i);
    auto dst = acc.limb(i);
    auto x = a.limb(i);
    auto y = b.limb(i);
    for (std::size_t k = 0; k < acc.n; ++k) dst[k] = q.add(dst[k], q.mul(x[k], y[k]));
  }
}

inline RnsPoly mul_ntt(const RnsPoly& a, const RnsPoly& b, std::size_t limbs, const Context& ctx) {
  RnsPoly r(a.n, limbs, true);
  mul_ntt_into(r, a, b, ctx);
  return r;
}

inline void add_into(RnsPoly& a, const RnsPoly& b, const Context& ctx) {
  for (std::size_t i = 0; i < a.limbs; ++i) {
    const auto& q = ctx.prime(i);
    auto x = a.limb(i);
    auto y = b.limb(i);
    for (std::size_t k = 0; k < a.n; ++k) x[k] = q.add(x[k], y[k]);
  }
}

inline RnsPoly prefix(const RnsPoly& a, std::size_t limbs) {
  RnsPoly r(a.n, limbs, a.ntt_form);
  std::copy(a.data.begin(), a.data.begin() + static_cast<std::ptrdiff_t>(limbs * a.n), r.data.begin());
  return r;
}

inline RnsPoly automorphism(const RnsPoly& a, u64 g, const Context& ctx) {
  RnsPoly r(a.n, a.limbs);
  for (std::size_t i = 0; i < a.limbs; ++i) apply_automorphism(a.limb(i), r.limb(i), g, ctx.prime(i));
  return r;
}

// Divides by the top prime q_l, rounding so that the result stays congruent
// mod p. Coefficient form in and out.
inline void drop_prime(RnsPoly& a, const Context& ctx) {
  const std::size_t l = a.limbs - 1;
  const Modulus& ql = ctx.prime(l);
  const Modulus& p = ctx.encoder().modulus();
  const auto top = a.limb(l);
  for (std::size_t k = 0; k < a.n; ++k) {
    // delta = c_l (mod q_l), delta = 0 (mod p), |delta| <= q_l p / 2
    const i64 v = ql.centered(top[k]);
    const i64 t = p.centered(p.from_signed(-v));
    for (std::size_t i = 0; i < l; ++i) {
      const Modulus& qi = ctx.prime(i);
      const u64 delta = qi.add(qi.from_signed(v), qi.mul(qi.reduce(ql.value()), qi.from_signed(t)));
      auto limb = a.limb(i);
      limb[k] = qi.mul(qi.sub(limb[k], delta), ctx.inv_prime(l, i));
    }
  }
  a.drop_last_limb();
}

// Key switching of x (coefficient form, limbs 0..l) from s' to s.
// Returns (k0, k1) in coefficient form with k0 + k1 s = x s' + p e'.
inline std::pair<RnsPoly, RnsPoly> key_switch(const RnsPoly& x, const SwitchingKey& key, const Context& ctx) {
  const std::size_t limbs = x.limbs;
  const std::size_t n = x.n;
  const std::size_t digits = ctx.digits_per_limb();
  const unsigned w = ctx.decomp_bits();
  const u64 mask = w >= 64 ? ~u64{0} : (u64{1} << w) - 1;
  RnsPoly acc0(n, limbs, true), acc1(n, limbs, true);
  RnsPoly d(n, limbs);
  for (std::size_t i = 0; i < limbs; ++i) {
    const auto src = x.limb(i);
    for (std::size_t j = 0; j < digits; ++j) {
      const unsigned shift = static_cast<unsigned>(w * j);
      for (std::size_t k = 0; k < n; ++k) d.data[k] = (src[k] >> shift) & mask;
      for (std::size_t t = 1; t < limbs; ++t) std::copy_n(d.data.begin(), n, d.data.begin() + static_cast<std::ptrdiff_t>(t * n));
      d.ntt_form = false;
      ctx.to_ntt(d);
      mul_ntt_into(acc0, d, key.b[i * digits + j], ctx);
      mul_ntt_into(acc1, d, key.a[i * digits + j], ctx);
    }
  }
  ctx.from_ntt(acc0);
  ctx.from_ntt(acc1);
  return {std::move(acc0), std::move(acc1)};
}

inline SwitchingKey make_switching_key(const Context& ctx, const RnsPoly& s_ntt, const RnsPoly& target_ntt,
                                       std::mt19937_64& rng) {
  SwitchingKey key;
  key.a_seed = rng();
  const std::size_t limbs = ctx.prime_count();
  const std::size_t digits = ctx.digits_per_limb();
  key.a = expand_uniform(ctx, key.a_seed, limbs * digits);
  const auto p = static_cast<i64>(ctx.params().p);
  for (std::size_t i = 0; i < limbs; ++i) {
    for (std::size_t j = 0; j < digits; ++j) {
      auto e = sample::centered_binomial(ctx.n(), rng);
      for (auto& x : e) x *= p;
      RnsPoly b = ctx.lift_signed(e, limbs);
      ctx.to_ntt(b);
      const RnsPoly& a = key.a[i * digits + j];
      for (std::size_t t = 0; t < limbs; ++t) {
        const auto& q = ctx.prime(t);
        auto dst = b.limb(t);
        auto av = a.limb(t);
        auto sv = s_ntt.limb(t);
        for (std::size_t k = 0; k < ctx.n(); ++k) dst[k] = q.sub(dst[k], q.mul(av[k], sv[k]));
      }
      const auto& qi = ctx.prime(i);
      const u64 gadget = qi.pow(2, static_cast<u64>(ctx.decomp_bits()) * j);
      auto dst = b.limb(i);
      auto tv = target_ntt.limb(i);
      for (std::size_t k = 0; k < ctx.n(); ++k) dst[k] = qi.add(dst[k], qi.mul(gadget, tv[k]));
      key.b.push_back(std::move(b));
    }
  }
  return key;
}

}  // namespace detail

// Leveled BGV over Z_Q[X]/(X^n+1) with an RNS modulus chain.
struct Backend {
  using KeySet = bgv::KeySet;
  using Ciphertext = bgv::Ciphertext;
  static constexpr he::BackendId kId = he::BackendId::kBgvMini;

  static KeySet keygen(const he::HeParams& params, const he::RotationSet& rotations, std::uint64_t seed) {
    return keygen(params, rotations, seed, kDefaultDecompBits);
  }

  static KeySet keygen(const he::HeParams& params, const he::RotationSet& rotations, std::uint64_t seed,
                       unsigned decomp_bits) {
    params.validate();
    for (std::size_t r : rotations.row_amounts) {
      if (r >= params.slots_per_row()) {
        throw Error(Errc::kInvalidParams, "rotation amount " + std::to_string(r) + " outside [0, n/2)");
      }
    }
    KeySet ks;
    ks.ctx = Context::create(params, decomp_bits);
    const Context& ctx = *ks.ctx;
    const std::size_t limbs = ctx.prime_count();
    std::mt19937_64 rng(seed);
    ks.key_id = rng();
    ks.rotation_set = rotations;
    ks.secret = sample::ternary(ctx.n(), rng);
    ks.secret_ntt = ctx.lift_signed(ks.secret, limbs);
    ctx.to_ntt(ks.secret_ntt);

    ks.has_public_key = true;
    ks.pk_a_seed = rng();
    {
      std::mt19937_64 arng(ks.pk_a_seed);
      ks.pk_a = sample::uniform(ctx, limbs, arng);
    }
    auto e = sample::centered_binomial(ctx.n(), rng);
    for (auto& x : e) x *= static_cast<i64>(params.p);
    ks.pk_b = ctx.lift_signed(e, limbs);
    ctx.to_ntt(ks.pk_b);
    for (std::size_t t = 0; t < limbs; ++t) {
      const auto& q = ctx.prime(t);
      auto dst = ks.pk_b.limb(t);
      auto av = ks.pk_a.limb(t);
      auto sv = ks.secret_ntt.limb(t);
      for (std::size_t k = 0; k < ctx.n(); ++k) dst[k] = q.sub(dst[k], q.mul(av[k], sv[k]));
    }

    const RnsPoly s2 = detail::mul_ntt(ks.secret_ntt, ks.secret_ntt, limbs, ctx);
    ks.relin = detail::make_switching_key(ctx, ks.secret_ntt, s2, rng);

    auto add_galois = [&](u64 g) {
      std::vector<i64> rotated(ctx.n());
      const u64 two_n = 2 * ctx.n();
      for (std::size_t j = 0; j < ctx.n(); ++j) {
        const u64 target = j * g % two_n;
        if (target < ctx.n()) {
          rotated[target] = ks.secret[j];
        } else {
          rotated[target - ctx.n()] = -ks.secret[j];
        }
      }
      RnsPoly t = ctx.lift_signed(rotated, limbs);
      ctx.to_ntt(t);
      ks.galois.emplace(g, detail::make_switching_key(ctx, ks.secret_ntt, t, rng));
    };
    for (std::size_t r : rotations.row_amounts) {
      if (r != 0) add_galois(galois_for_rotation(r, ctx.n()));
    }
    if (rotations.column) add_galois(galois_for_row_swap(ctx.n()));
    return ks;
  }

  static Ciphertext encrypt(const he::SlotMatrix& m, const KeySet& keys, std::mt19937_64& rng) {
    if (!keys.has_public()) throw Error(Errc::kInvalidParams, "encryption needs the public key");
    const Context& ctx = *keys.ctx;
    he::slots::check_reduced(m, ctx.params().p, ctx.n());
    const std::size_t limbs = ctx.prime_count();
    const auto p = static_cast<i64>(ctx.params().p);
    RnsPoly u = ctx.lift_signed(sample::ternary(ctx.n(), rng), limbs);
    ctx.to_ntt(u);
    RnsPoly c0 = detail::mul_ntt(keys.pk_b, u, limbs, ctx);
    RnsPoly c1 = detail::mul_ntt(keys.pk_a, u, limbs, ctx);
    ctx.from_ntt(c0);
    ctx.from_ntt(c1);
    auto e1 = sample::centered_binomial(ctx.n(), rng);
    auto e2 = sample::centered_binomial(ctx.n(), rng);
    for (auto& x : e1) x *= p;
    for (auto& x : e2) x *= p;
    detail::add_into(c0, ctx.lift_signed(e1, limbs), ctx);
    detail::add_into(c0, ctx.lift_plaintext(m, limbs), ctx);
    detail::add_into(c1, ctx.lift_signed(e2, limbs), ctx);
    return Ciphertext(ctx.max_level(), keys.key_id, std::move(c0), std::move(c1), fresh_noise(ctx));
  }

  static he::SlotMatrix decrypt(const Ciphertext& c, const KeySet& keys) {
    if (!keys.has_secret()) throw Error(Errc::kMissingSecretKey, "decryption needs the secret key");
    check(c, keys);
    const Context& ctx = *keys.ctx;
    Ciphertext low = modswitch_to(c, 0, ctx);
    const Modulus& q0 = ctx.prime(0);
    std::vector<u64> c1(low.c1_.limb(0).begin(), low.c1_.limb(0).end());
    ctx.ntt(0).forward(c1);
    const auto s = keys.secret_ntt.limb(0);
    for (std::size_t k = 0; k < c1.size(); ++k) c1[k] = q0.mul(c1[k], s[k]);
    ctx.ntt(0).inverse(c1);
    const Modulus& p = ctx.encoder().modulus();
    const auto c0 = low.c0_.limb(0);
    std::vector<u64> coeffs(ctx.n());
    for (std::size_t k = 0; k < ctx.n(); ++k) coeffs[k] = p.from_signed(q0.centered(q0.add(c0[k], c1[k])));
    return ctx.encoder().decode(coeffs);
  }

  static Ciphertext add(const Ciphertext& a, const Ciphertext& b, const KeySet& keys) {
    check(a, keys);
    check(b, keys);
    const Context& ctx = *keys.ctx;
    const int level = std::min(a.level(), b.level());
    Ciphertext r = modswitch_to(a, level, ctx);
    const Ciphertext rhs = modswitch_to(b, level, ctx);
    detail::add_into(r.c0_, rhs.c0_, ctx);
    detail::add_into(r.c1_, rhs.c1_, ctx);
    r.noise_log2_ = detail::log2_add(r.noise_log2_, rhs.noise_log2_);
    return r;
  }

  static Ciphertext add_plain(const Ciphertext& a, const he::SlotMatrix& m, const KeySet& keys) {
    check(a, keys);
    const Context& ctx = *keys.ctx;
    he::slots::check_reduced(m, ctx.params().p, ctx.n());
    Ciphertext r = a;
    detail::add_into(r.c0_, ctx.lift_plaintext(m, r.c0_.limbs), ctx);
    r.noise_log2_ = detail::log2_add(r.noise_log2_, std::log2(static_cast<double>(ctx.params().p)));
    return r;
  }

  static Ciphertext mul(const Ciphertext& a, const Ciphertext& b, const KeySet& keys) {
    check(a, keys);
    check(b, keys);
    const Context& ctx = *keys.ctx;
    const int level = std::min(a.level(), b.level());
    require_level(level);
    Ciphertext x = modswitch_to(a, level, ctx);
    Ciphertext y = modswitch_to(b, level, ctx);
    const std::size_t limbs = x.c0_.limbs;
    ctx.to_ntt(x.c0_);
    ctx.to_ntt(x.c1_);
    ctx.to_ntt(y.c0_);
    ctx.to_ntt(y.c1_);
    RnsPoly d0 = detail::mul_ntt(x.c0_, y.c0_, limbs, ctx);
    RnsPoly d1 = detail::mul_ntt(x.c0_, y.c1_, limbs, ctx);
    detail::mul_ntt_into(d1, x.c1_, y.c0_, ctx);
    RnsPoly d2 = detail::mul_ntt(x.c1_, y.c1_, limbs, ctx);
    ctx.from_ntt(d0);
    ctx.from_ntt(d1);
    ctx.from_ntt(d2);
    auto [k0, k1] = detail::key_switch(d2, keys.relin, ctx);
    detail::add_into(d0, k0, ctx);
    detail::add_into(d1, k1, ctx);
    const double noise = detail::log2_add(x.noise_log2_ + y.noise_log2_ + 0.5 * std::log2(static_cast<double>(ctx.n())),
                                          keyswitch_noise(ctx, level));
    Ciphertext r(level, keys.key_id, std::move(d0), std::move(d1), noise);
    check_noise(r, ctx);
    return modswitch_to(r, level - 1, ctx);
  }

  static Ciphertext mul_plain(const Ciphertext& a, const he::SlotMatrix& m, const KeySet& keys) {
    check(a, keys);
    const Context& ctx = *keys.ctx;
    he::slots::check_reduced(m, ctx.params().p, ctx.n());
    require_level(a.level());
    Ciphertext r = a;
    RnsPoly pt = ctx.lift_plaintext(m, r.c0_.limbs);
    ctx.to_ntt(pt);
    for (RnsPoly* c : {&r.c0_, &r.c1_}) {
      ctx.to_ntt(*c);
      RnsPoly prod = detail::mul_ntt(*c, pt, c->limbs, ctx);
      ctx.from_ntt(prod);
      *c = std::move(prod);
    }
    r.noise_log2_ += std::log2(static_cast<double>(ctx.params().p) * std::sqrt(static_cast<double>(ctx.n())) / 2);
    check_noise(r, ctx);
    return modswitch_to(r, a.level() - 1, ctx);
  }

  static Ciphertext rot_row(const Ciphertext& a, std::size_t r, const KeySet& keys) {
    check(a, keys);
    r %= keys.params().slots_per_row();
    if (r == 0) return a;
    if (!keys.rotations().has_row(r)) {
      throw Error(Errc::kMissingRotationKey, "no key for row rotation by " + std::to_string(r));
    }
    return apply_galois(a, galois_for_rotation(r, keys.ctx->n()), keys);
  }

  static Ciphertext rot_col(const Ciphertext& a, const KeySet& keys) {
    check(a, keys);
    if (!keys.rotations().column) throw Error(Errc::kMissingRotationKey, "no key for the row swap");
    return apply_galois(a, galois_for_row_swap(keys.ctx->n()), keys);
  }

  // Drops primes from the top of the chain until the ciphertext sits at `level`.
  static Ciphertext modswitch_to(const Ciphertext& c, int level, const Context& ctx) {
    Ciphertext r = c;
    const double floor_bits = modswitch_floor(ctx);
    while (r.level_ > level) {
      const double log2_q = std::log2(static_cast<double>(ctx.prime(static_cast<std::size_t>(r.level_)).value()));
      detail::drop_prime(r.c0_, ctx);
      detail::drop_prime(r.c1_, ctx);
      r.noise_log2_ = detail::log2_add(r.noise_log2_ - log2_q, floor_bits);
      --r.level_;
    }
    return r;
  }

  static double fresh_noise(const Context& ctx) {
    const double p = static_cast<double>(ctx.params().p);
    const double n = static_cast<double>(ctx.n());
    return std::log2(p * 6 * detail::kErrorStddev * std::sqrt(4 * n / 3 + 1) + p / 2);
  }

  static double keyswitch_noise(const Context& ctx, int level) {
    const double p = static_cast<double>(ctx.params().p);
    const double n = static_cast<double>(ctx.n());
    const double terms = static_cast<double>(ctx.digits_per_limb()) * (level + 1) * n;
    const double digit_rms = std::exp2(ctx.decomp_bits()) / std::sqrt(3.0);
    return std::log2(p * 6 * detail::kErrorStddev * std::sqrt(terms) * digit_rms);
  }

  // Rounding term added by one prime drop.
  static double modswitch_floor(const Context& ctx) {
    const double p = static_cast<double>(ctx.params().p);
    const double n = static_cast<double>(ctx.n());
    return std::log2(6 * p / std::sqrt(12.0) * std::sqrt(1 + 2 * n / 3));
  }

 private:
  static Ciphertext apply_galois(const Ciphertext& a, u64 g, const KeySet& keys) {
    const Context& ctx = *keys.ctx;
    const auto it = keys.galois.find(g);
    if (it == keys.galois.end()) throw Error(Errc::kMissingRotationKey, "key set has no Galois key " + std::to_string(g));
    RnsPoly c0 = detail::automorphism(a.c0_, g, ctx);
    const RnsPoly c1 = detail::automorphism(a.c1_, g, ctx);
    auto [k0, k1] = detail::key_switch(c1, it->second, ctx);
    detail::add_into(c0, k0, ctx);
    Ciphertext r(a.level(), a.key_id(), std::move(c0), std::move(k1),
                 detail::log2_add(a.noise_log2(), keyswitch_noise(ctx, a.level())));
    check_noise(r, ctx);
    return r;
  }

  static void check(const Ciphertext& c, const KeySet& keys) {
    if (c.key_id() != keys.key_id) throw Error(Errc::kBackendMismatch, "ciphertext was made under another key set");
    if (c.level() < 0 || c.level() > keys.ctx->max_level() ||
        c.c0().limbs != static_cast<std::size_t>(c.level()) + 1 || c.c1().limbs != c.c0().limbs ||
        c.c0().n != keys.ctx->n() || c.c1().n != keys.ctx->n()) {
      throw Error(Errc::kFormat, "ciphertext shape does not match the parameters");
    }
  }
  static void require_level(int level) {
    if (level < 1) throw Error(Errc::kLevelExhausted, "multiplication needs a level, ciphertext has none left");
  }
  static void check_noise(const Ciphertext& c, const Context& ctx) {
    if (c.noise_log2() >= ctx.log2_modulus(c.level()) - 1) {
      throw Error(Errc::kNoiseOverflow, "noise estimate 2^" + std::to_string(c.noise_log2()) +
                                            " reaches the modulus at level " + std::to_string(c.level()));
    }
  }
};

static_assert(he::HeBackend<Backend>);

}  // namespace hcpdq::bgv
