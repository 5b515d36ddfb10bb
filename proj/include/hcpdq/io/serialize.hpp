#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "hcpdq/bgv/bgv.hpp"
#include "hcpdq/he/simulator.hpp"
#include "hcpdq/homcomp/compress.hpp"
#include "hcpdq/io/bytes.hpp"
#include "hcpdq/pdq/protocol.hpp"

namespace hcpdq::io {

// Envelope: "HCV1", backend id byte, u16 format version, then a payload that
// starts with a kind byte. Little-endian throughout.
inline constexpr char kMagic[4] = {'H', 'C', 'V', '1'};
inline constexpr std::uint16_t kFormatVersion = 1;

enum class Kind : std::uint8_t { kCiphertext = 1, kKeySet = 2, kAnswer = 3, kQuery = 4 };

// Upper bounds applied while parsing, so a corrupt length cannot trigger a
// huge allocation.
inline constexpr std::size_t kMaxRing = std::size_t{1} << 17;
inline constexpr std::size_t kMaxCount = std::size_t{1} << 16;

inline void write_envelope(Writer& w, he::BackendId backend, Kind kind) {
  w.raw(kMagic, 4);
  w.u8(static_cast<std::uint8_t>(backend));
  w.u16(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(kind));
}

inline void read_envelope(Reader& r, he::BackendId backend, Kind kind) {
  if (std::memcmp(r.raw(4).data(), kMagic, 4) != 0) throw Error(Errc::kFormat, "bad magic, not an HCV1 object");
  const auto b = r.u8();
  if (b != static_cast<std::uint8_t>(he::BackendId::kSimulator) && b != static_cast<std::uint8_t>(he::BackendId::kBgvMini)) {
    throw Error(Errc::kFormat, "unknown backend id " + std::to_string(b));
  }
  if (b != static_cast<std::uint8_t>(backend)) {
    throw Error(Errc::kBackendMismatch, std::string("object is for backend ") +
                                            he::backend_name(static_cast<he::BackendId>(b)) + ", expected " +
                                            he::backend_name(backend));
  }
  if (const auto v = r.u16(); v != kFormatVersion) throw Error(Errc::kFormat, "format version " + std::to_string(v));
  if (const auto k = r.u8(); k != static_cast<std::uint8_t>(kind)) {
    throw Error(Errc::kFormat, "object kind " + std::to_string(k) + ", expected " +
                                   std::to_string(static_cast<int>(kind)));
  }
}

// Backend id from an envelope without parsing further.
inline he::BackendId peek_backend(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(Errc::kFormat, "not an HCV1 object");
  return static_cast<he::BackendId>(bytes[4]);
}

inline void put_params(Writer& w, const he::HeParams& p) {
  w.u32(static_cast<std::uint32_t>(p.n));
  w.u64(p.p);
  w.u8(static_cast<std::uint8_t>(p.max_level));
}

inline he::HeParams get_params(Reader& r) {
  he::HeParams p;
  p.n = r.u32();
  p.p = r.u64();
  p.max_level = r.u8();
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(Errc::kFormat, std::string("stored parameters invalid: ") + e.what());
  }
  if (p.n > kMaxRing) throw Error(Errc::kFormat, "ring dimension too large");
  return p;
}

inline void put_rotations(Writer& w, const he::RotationSet& rot) {
  w.u8(rot.column ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(rot.row_amounts.size()));
  for (auto a : rot.row_amounts) w.u32(static_cast<std::uint32_t>(a));
}

inline he::RotationSet get_rotations(Reader& r) {
  he::RotationSet rot;
  rot.column = r.u8() != 0;
  const auto count = r.u32();
  if (count > kMaxCount) throw Error(Errc::kFormat, "too many rotation amounts");
  for (std::uint32_t i = 0; i < count; ++i) rot.row_amounts.insert(r.u32());
  return rot;
}

inline std::uint8_t flag(Reader& r) {
  const auto f = r.u8();
  if (f > 1) throw Error(Errc::kFormat, "flag byte not 0/1");
  return f;
}

template <he::HeBackend B>
struct Codec;

template <>
struct Codec<he::sim::Backend> {
  using Ct = he::sim::Ciphertext;
  using Keys = he::sim::KeySet;

  // level byte, key id, n, then the n slot values row-major.
  static void put(Writer& w, const Ct& c) {
    w.u8(static_cast<std::uint8_t>(c.level()));
    w.u64(c.key_id());
    w.u32(static_cast<std::uint32_t>(c.slots().n()));
    w.words(c.slots().values());
  }
  static Ct get_ciphertext(Reader& r) {
    const int level = r.u8();
    const u64 key_id = r.u64();
    const std::size_t n = r.u32();
    if (n > kMaxRing || n < 2 || !is_power_of_two(n)) throw Error(Errc::kFormat, "bad slot count");
    he::SlotMatrix m(n);
    const auto vals = r.words(n);
    std::copy(vals.begin(), vals.end(), m.values().begin());
    return Ct(std::move(m), level, key_id);
  }

  static void put(Writer& w, const Keys& k) {
    put_params(w, k.params());
    w.u64(k.key_id());
    w.u8(k.has_secret() ? 1 : 0);
    w.u8(k.has_public() ? 1 : 0);
    put_rotations(w, k.rotations());
  }
  static Keys get_keys(Reader& r) {
    const auto params = get_params(r);
    const u64 key_id = r.u64();
    const bool secret = flag(r) != 0;
    const bool pub = flag(r) != 0;
    Keys k(params, key_id, get_rotations(r), secret);
    k.set_public(pub);
    return k;
  }
};

template <>
struct Codec<bgv::Backend> {
  using Ct = bgv::Ciphertext;
  using Keys = bgv::KeySet;

  static void put_poly(Writer& w, const bgv::RnsPoly& a) {
    w.u32(static_cast<std::uint32_t>(a.n));
    w.u8(static_cast<std::uint8_t>(a.limbs));
    w.u8(a.ntt_form ? 1 : 0);
    w.words(a.data);
  }
  static bgv::RnsPoly get_poly(Reader& r) {
    const std::size_t n = r.u32();
    const std::size_t limbs = r.u8();
    const bool ntt = flag(r) != 0;
    if (n > kMaxRing || n < 2 || !is_power_of_two(n)) throw Error(Errc::kFormat, "bad ring dimension");
    bgv::RnsPoly a(n, limbs, ntt);
    a.data = r.words(n * limbs);
    return a;
  }

  // level byte, key id, noise estimate, then c0 and c1 coefficient arrays.
  static void put(Writer& w, const Ct& c) {
    w.u8(static_cast<std::uint8_t>(c.level()));
    w.u64(c.key_id());
    w.u64(std::bit_cast<std::uint64_t>(c.noise_log2()));
    put_poly(w, c.c0());
    put_poly(w, c.c1());
  }
  static Ct get_ciphertext(Reader& r) {
    const int level = r.u8();
    const u64 key_id = r.u64();
    const double noise = std::bit_cast<double>(r.u64());
    auto c0 = get_poly(r);
    auto c1 = get_poly(r);
    if (c0.limbs != static_cast<std::size_t>(level) + 1 || c1.limbs != c0.limbs || c1.n != c0.n) {
      throw Error(Errc::kFormat, "ciphertext components do not match its level");
    }
    return Ct(level, key_id, std::move(c0), std::move(c1), noise);
  }

  // Uniform halves of keys are stored as seeds and re-expanded on load.
  static void put_switching(Writer& w, const bgv::SwitchingKey& k) {
    w.u64(k.a_seed);
    w.u32(static_cast<std::uint32_t>(k.b.size()));
    for (const auto& b : k.b) put_poly(w, b);
  }
  static bgv::SwitchingKey get_switching(Reader& r) {
    bgv::SwitchingKey k;
    k.a_seed = r.u64();
    const auto count = r.u32();
    if (count > kMaxCount) throw Error(Errc::kFormat, "too many key-switching digits");
    for (std::uint32_t i = 0; i < count; ++i) k.b.push_back(get_poly(r));
    return k;
  }

  static void put(Writer& w, const Keys& k) {
    put_params(w, k.params());
    w.u8(static_cast<std::uint8_t>(k.ctx->decomp_bits()));
    w.u64(k.key_id);
    put_rotations(w, k.rotation_set);
    w.u8(k.has_secret() ? 1 : 0);
    if (k.has_secret()) {
      for (i64 x : k.secret) w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(x)));
    }
    w.u8(k.has_public_key ? 1 : 0);
    if (k.has_public_key) {
      put_poly(w, k.pk_b);
      w.u64(k.pk_a_seed);
      put_switching(w, k.relin);
      w.u32(static_cast<std::uint32_t>(k.galois.size()));
      for (const auto& [g, key] : k.galois) {
        w.u64(g);
        put_switching(w, key);
      }
    }
  }
  static Keys get_keys(Reader& r) {
    const auto params = get_params(r);
    const unsigned bits = r.u8();
    if (bits < 1 || bits > 58) throw Error(Errc::kFormat, "bad decomposition width");
    Keys k;
    k.ctx = bgv::Context::create(params, bits);
    k.key_id = r.u64();
    k.rotation_set = get_rotations(r);
    if (flag(r)) {
      const auto raw = r.raw(params.n);
      k.secret.resize(params.n);
      for (std::size_t i = 0; i < params.n; ++i) {
        const i64 x = static_cast<std::int8_t>(raw[i]);
        if (x < -1 || x > 1) throw Error(Errc::kFormat, "secret key is not ternary");
        k.secret[i] = x;
      }
    }
    k.has_public_key = flag(r) != 0;
    if (k.has_public_key) {
      k.pk_b = get_poly(r);
      k.pk_a_seed = r.u64();
      k.relin = get_switching(r);
      const auto count = r.u32();
      if (count > kMaxCount) throw Error(Errc::kFormat, "too many Galois keys");
      for (std::uint32_t i = 0; i < count; ++i) {
        const u64 g = r.u64();
        k.galois[g] = get_switching(r);
      }
      check_key_shapes(k);
    }
    k.restore_derived();
    return k;
  }

 private:
  static void check_key_shapes(const Keys& k) {
    const std::size_t limbs = k.ctx->prime_count();
    const std::size_t digits = limbs * k.ctx->digits_per_limb();
    auto ok = [&](const bgv::RnsPoly& a) { return a.n == k.ctx->n() && a.limbs == limbs; };
    auto ok_key = [&](const bgv::SwitchingKey& s) {
      if (s.b.size() != digits) return false;
      for (const auto& b : s.b) {
        if (!ok(b)) return false;
      }
      return true;
    };
    bool good = ok(k.pk_b) && ok_key(k.relin);
    for (const auto& [g, s] : k.galois) good = good && ok_key(s);
    if (!good) throw Error(Errc::kFormat, "key material does not match the parameter set");
  }
};

template <he::HeBackend B>
std::vector<std::uint8_t> serialize_ciphertext(const typename B::Ciphertext& c) {
  Writer w;
  write_envelope(w, B::kId, Kind::kCiphertext);
  Codec<B>::put(w, c);
  return w.take();
}

template <he::HeBackend B>
typename B::Ciphertext parse_ciphertext(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  read_envelope(r, B::kId, Kind::kCiphertext);
  auto c = Codec<B>::get_ciphertext(r);
  r.expect_end();
  return c;
}

template <he::HeBackend B>
std::vector<std::uint8_t> serialize_keys(const typename B::KeySet& k) {
  Writer w;
  write_envelope(w, B::kId, Kind::kKeySet);
  Codec<B>::put(w, k);
  return w.take();
}

template <he::HeBackend B>
typename B::KeySet parse_keys(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  read_envelope(r, B::kId, Kind::kKeySet);
  auto k = Codec<B>::get_keys(r);
  r.expect_end();
  return k;
}

// Answer: u16 layout version, s, then (ciphertext, row, column) of the first
// slot of w and of e, then the ciphertexts.
template <he::HeBackend B>
std::vector<std::uint8_t> serialize_answer(const homcomp::CompressedAnswer<B>& a) {
  Writer w;
  write_envelope(w, B::kId, Kind::kAnswer);
  w.u16(homcomp::kLayoutVersion);
  w.u32(a.layout.s);
  const std::uint8_t e_ct = a.layout.packed ? 0 : 1, e_row = a.layout.packed ? 1 : 0;
  w.u8(0), w.u8(0), w.u32(0);
  w.u8(e_ct), w.u8(e_row), w.u32(0);
  w.u32(static_cast<std::uint32_t>(a.ciphertexts.size()));
  for (const auto& c : a.ciphertexts) Codec<B>::put(w, c);
  return w.take();
}

template <he::HeBackend B>
homcomp::CompressedAnswer<B> parse_answer(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  read_envelope(r, B::kId, Kind::kAnswer);
  if (const auto v = r.u16(); v != homcomp::kLayoutVersion) {
    throw Error(Errc::kFormat, "answer layout version " + std::to_string(v));
  }
  homcomp::CompressedAnswer<B> a;
  a.layout.s = r.u32();
  const auto w_ct = r.u8(), w_row = r.u8();
  const auto w_col = r.u32();
  const auto e_ct = r.u8(), e_row = r.u8();
  const auto e_col = r.u32();
  if (w_ct != 0 || w_row != 0 || w_col != 0 || e_col != 0 || !((e_ct == 0 && e_row == 1) || (e_ct == 1 && e_row == 0))) {
    throw Error(Errc::kFormat, "unsupported answer slot layout");
  }
  a.layout.packed = e_ct == 0;
  const auto count = r.u32();
  if (count != (a.layout.packed ? 1u : 2u)) throw Error(Errc::kFormat, "answer ciphertext count does not fit its layout");
  for (std::uint32_t i = 0; i < count; ++i) a.ciphertexts.push_back(Codec<B>::get_ciphertext(r));
  r.expect_end();
  return a;
}

template <he::HeBackend B>
std::vector<std::uint8_t> serialize_query(const pdq::PdqQuery<B>& q) {
  Writer w;
  write_envelope(w, B::kId, Kind::kQuery);
  w.u8(static_cast<std::uint8_t>(q.predicate));
  w.u8(static_cast<std::uint8_t>(q.post));
  Codec<B>::put(w, q.condition);
  return w.take();
}

template <he::HeBackend B>
pdq::PdqQuery<B> parse_query(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  read_envelope(r, B::kId, Kind::kQuery);
  pdq::PdqQuery<B> q;
  const auto pred = r.u8(), post = r.u8();
  if (!pdq::known_predicate(pred)) throw Error(Errc::kProtocol, "unknown predicate id " + std::to_string(pred));
  if (!pdq::known_post_fn(post)) throw Error(Errc::kProtocol, "unknown post-function id " + std::to_string(post));
  q.predicate = static_cast<pdq::Predicate>(pred);
  q.post = static_cast<pdq::PostFn>(post);
  q.condition = Codec<B>::get_ciphertext(r);
  r.expect_end();
  return q;
}

}  // namespace hcpdq::io
