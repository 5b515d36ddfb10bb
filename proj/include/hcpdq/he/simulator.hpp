#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "hcpdq/he/evaluator.hpp"

namespace hcpdq::he::sim {

// Key material of the simulator: no secrets to speak of, but the same
// discipline as a real scheme (declared rotations, key identity, secret
// presence) so programs that run here also run on BGV.
class KeySet {
 public:
  KeySet() = default;
  KeySet(HeParams params, std::uint64_t key_id, RotationSet rotations, bool has_secret)
      : params_(params), key_id_(key_id), rotations_(std::move(rotations)), has_secret_(has_secret) {}

  const HeParams& params() const noexcept { return params_; }
  std::uint64_t key_id() const noexcept { return key_id_; }
  const RotationSet& rotations() const noexcept { return rotations_; }
  bool has_secret() const noexcept { return has_secret_; }
  bool has_public() const noexcept { return has_public_; }

  KeySet public_part() const {
    KeySet k = *this;
    k.has_secret_ = false;
    return k;
  }
  KeySet secret_part() const {
    KeySet k = *this;
    k.has_public_ = false;
    k.rotations_ = {};
    return k;
  }

  void set_public(bool present) { has_public_ = present; }

  friend bool operator==(const KeySet&, const KeySet&) = default;

 private:
  HeParams params_;
  std::uint64_t key_id_ = 0;
  RotationSet rotations_;
  bool has_secret_ = false;
  bool has_public_ = true;
};

class Ciphertext {
 public:
  Ciphertext() = default;
  Ciphertext(SlotMatrix slots, int level, std::uint64_t key_id)
      : slots_(std::move(slots)), level_(level), key_id_(key_id) {}

  static constexpr BackendId backend() noexcept { return BackendId::kSimulator; }
  int level() const noexcept { return level_; }
  std::uint64_t key_id() const noexcept { return key_id_; }
  const SlotMatrix& slots() const noexcept { return slots_; }

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;

 private:
  SlotMatrix slots_;
  int level_ = 0;
  std::uint64_t key_id_ = 0;
};

// Exact cleartext model of BGV SIMD semantics with level accounting.
struct Backend {
  using KeySet = sim::KeySet;
  using Ciphertext = sim::Ciphertext;
  static constexpr BackendId kId = BackendId::kSimulator;

  static KeySet keygen(const HeParams& params, const RotationSet& rotations, std::uint64_t seed) {
    params.validate();
    for (std::size_t r : rotations.row_amounts) {
      if (r >= params.slots_per_row()) {
        throw Error(Errc::kInvalidParams, "rotation amount " + std::to_string(r) + " outside [0, n/2)");
      }
    }
    std::mt19937_64 rng(seed);
    return KeySet(params, rng(), rotations, true);
  }

  static Ciphertext encrypt(const SlotMatrix& m, const KeySet& keys, std::mt19937_64& /*rng*/) {
    if (!keys.has_public()) throw Error(Errc::kInvalidParams, "encryption needs the public key");
    slots::check_reduced(m, keys.params().p, keys.params().n);
    return Ciphertext(m, keys.params().max_level, keys.key_id());
  }

  static SlotMatrix decrypt(const Ciphertext& c, const KeySet& keys) {
    if (!keys.has_secret()) throw Error(Errc::kMissingSecretKey, "decryption needs the secret key");
    check(c, keys);
    return c.slots();
  }

  static Ciphertext add(const Ciphertext& a, const Ciphertext& b, const KeySet& keys) {
    check(a, keys);
    check(b, keys);
    return Ciphertext(slots::add(a.slots(), b.slots(), Modulus(keys.params().p)), std::min(a.level(), b.level()),
                      keys.key_id());
  }

  static Ciphertext add_plain(const Ciphertext& a, const SlotMatrix& m, const KeySet& keys) {
    check(a, keys);
    slots::check_reduced(m, keys.params().p, keys.params().n);
    return Ciphertext(slots::add(a.slots(), m, Modulus(keys.params().p)), a.level(), keys.key_id());
  }

  static Ciphertext mul(const Ciphertext& a, const Ciphertext& b, const KeySet& keys) {
    check(a, keys);
    check(b, keys);
    const int level = std::min(a.level(), b.level());
    require_level(level);
    return Ciphertext(slots::mul(a.slots(), b.slots(), Modulus(keys.params().p)), level - 1, keys.key_id());
  }

  static Ciphertext mul_plain(const Ciphertext& a, const SlotMatrix& m, const KeySet& keys) {
    check(a, keys);
    slots::check_reduced(m, keys.params().p, keys.params().n);
    require_level(a.level());
    return Ciphertext(slots::mul(a.slots(), m, Modulus(keys.params().p)), a.level() - 1, keys.key_id());
  }

  static Ciphertext rot_row(const Ciphertext& a, std::size_t r, const KeySet& keys) {
    check(a, keys);
    r %= keys.params().slots_per_row();
    if (r == 0) return a;
    if (!keys.rotations().has_row(r)) {
      throw Error(Errc::kMissingRotationKey, "no key for row rotation by " + std::to_string(r));
    }
    return Ciphertext(slots::rotate_rows(a.slots(), r), a.level(), keys.key_id());
  }

  static Ciphertext rot_col(const Ciphertext& a, const KeySet& keys) {
    check(a, keys);
    if (!keys.rotations().column) throw Error(Errc::kMissingRotationKey, "no key for the row swap");
    return Ciphertext(slots::swap_rows(a.slots()), a.level(), keys.key_id());
  }

 private:
  static void check(const Ciphertext& c, const KeySet& keys) {
    if (c.key_id() != keys.key_id()) throw Error(Errc::kBackendMismatch, "ciphertext was made under another key set");
  }
  static void require_level(int level) {
    if (level < 1) throw Error(Errc::kLevelExhausted, "multiplication needs a level, ciphertext has none left");
  }
};

static_assert(HeBackend<Backend>);

}  // namespace hcpdq::he::sim
