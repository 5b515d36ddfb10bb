#pragma once

#include <concepts>
#include <cstdint>
#include <random>

#include "hcpdq/he/types.hpp"

namespace hcpdq::he {

// What compression and PDQ need from an HE backend: SIMD add, Hadamard
// product (ciphertext or plaintext operand), row rotation and row swap.
// Levels follow one contract everywhere: add keeps min(level), every
// multiplication consumes one level and rejects level-0 inputs, rotations are
// level-neutral.
template <class B>
concept HeBackend = requires(const typename B::KeySet& keys, const typename B::Ciphertext& c,
                             const SlotMatrix& m, const HeParams& params, const RotationSet& rot,
                             std::mt19937_64& rng, std::size_t r, std::uint64_t seed) {
  { B::kId } -> std::convertible_to<BackendId>;
  { B::keygen(params, rot, seed) } -> std::same_as<typename B::KeySet>;
  { B::encrypt(m, keys, rng) } -> std::same_as<typename B::Ciphertext>;
  { B::decrypt(c, keys) } -> std::same_as<SlotMatrix>;
  { B::add(c, c, keys) } -> std::same_as<typename B::Ciphertext>;
  { B::add_plain(c, m, keys) } -> std::same_as<typename B::Ciphertext>;
  { B::mul(c, c, keys) } -> std::same_as<typename B::Ciphertext>;
  { B::mul_plain(c, m, keys) } -> std::same_as<typename B::Ciphertext>;
  { B::rot_row(c, r, keys) } -> std::same_as<typename B::Ciphertext>;
  { B::rot_col(c, keys) } -> std::same_as<typename B::Ciphertext>;
  { c.level() } -> std::convertible_to<int>;
  { keys.params() } -> std::convertible_to<HeParams>;
  { keys.rotations() } -> std::convertible_to<RotationSet>;
};

// One evaluation session: binds a key set and counts the work done through it.
// Sessions are cheap; give each thread its own.
template <HeBackend B>
class Evaluator {
 public:
  using Backend = B;
  using Ciphertext = typename B::Ciphertext;
  using KeySet = typename B::KeySet;

  explicit Evaluator(const KeySet& keys) : keys_(&keys) {}
  // Holds a pointer to the key set, so temporaries are refused.
  explicit Evaluator(const KeySet&&) = delete;

  const KeySet& keys() const noexcept { return *keys_; }
  const HeParams& params() const noexcept { return keys_->params(); }
  const OpCounters& counters() const noexcept { return counters_; }
  void reset_counters() noexcept { counters_ = {}; }

  Ciphertext add(const Ciphertext& a, const Ciphertext& b) {
    auto r = B::add(a, b, *keys_);
    ++counters_.adds;
    return r;
  }
  Ciphertext add_plain(const Ciphertext& a, const SlotMatrix& m) {
    auto r = B::add_plain(a, m, *keys_);
    ++counters_.adds;
    return r;
  }
  Ciphertext mul(const Ciphertext& a, const Ciphertext& b) {
    auto r = B::mul(a, b, *keys_);
    ++counters_.ct_mults;
    ++counters_.keyswitches;  // relinearization
    return r;
  }
  Ciphertext mul_plain(const Ciphertext& a, const SlotMatrix& m) {
    auto r = B::mul_plain(a, m, *keys_);
    ++counters_.pt_mults;
    return r;
  }
  Ciphertext rot_row(const Ciphertext& a, std::size_t r) {
    const std::size_t m = params().slots_per_row();
    if (r % m == 0) return a;
    auto out = B::rot_row(a, r % m, *keys_);
    ++counters_.keyswitches;
    return out;
  }
  Ciphertext rot_col(const Ciphertext& a) {
    auto out = B::rot_col(a, *keys_);
    ++counters_.keyswitches;
    return out;
  }

 private:
  const KeySet* keys_;
  OpCounters counters_;
};

}  // namespace hcpdq::he
