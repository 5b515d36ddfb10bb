#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hcpdq/bgv/ntt.hpp"
#include "hcpdq/he/types.hpp"

namespace hcpdq::bgv {

inline constexpr unsigned kDefaultDecompBits = 16;
inline constexpr unsigned kChainPrimeBits = 58;
inline constexpr int kNoiseEta = 21;  // centered binomial, variance 10.5

// Element of R_Q for Q = q_0 ... q_l in RNS form: one length-n residue
// vector per prime, limb-major.
struct RnsPoly {
  std::size_t n = 0;
  std::size_t limbs = 0;
  bool ntt_form = false;
  std::vector<u64> data;

  RnsPoly() = default;
  RnsPoly(std::size_t n_, std::size_t limbs_, bool ntt = false)
      : n(n_), limbs(limbs_), ntt_form(ntt), data(n_ * limbs_, 0) {}

  std::span<u64> limb(std::size_t i) { return {data.data() + i * n, n}; }
  std::span<const u64> limb(std::size_t i) const { return {data.data() + i * n, n}; }

  void drop_last_limb() {
    --limbs;
    data.resize(n * limbs);
  }

  friend bool operator==(const RnsPoly&, const RnsPoly&) = default;
};

// CRT slot isomorphism Z_p[X]/(X^n+1) ~ Z_p^{2 x n/2}. Slot (0, j) is the
// evaluation at psi^(3^j), slot (1, j) at psi^(-3^j), so X -> X^(3^r) rotates
// both rows left by r and X -> X^(-1) swaps them.
class SlotEncoder {
 public:
  SlotEncoder(std::size_t n, u64 p) : n_(n), p_(p), ntt_(n, p_) {
    const std::size_t m = n / 2;
    const u64 two_n = 2 * n;
    eval_index_.resize(n);
    u64 e = 1;
    for (std::size_t j = 0; j < m; ++j) {
      eval_index_[j] = static_cast<std::size_t>((e - 1) / 2);
      eval_index_[m + j] = static_cast<std::size_t>(((two_n - e) - 1) / 2);
      e = (e * 3) % two_n;
    }
  }

  // Coefficients mod p of the plaintext polynomial.
  std::vector<u64> encode(const he::SlotMatrix& m) const {
    std::vector<u64> evals(n_);
    for (std::size_t k = 0; k < n_; ++k) evals[eval_index_[k]] = m.values()[k];
    ntt_.inverse(evals);
    return evals;
  }

  he::SlotMatrix decode(std::span<const u64> coeffs) const {
    std::vector<u64> evals(coeffs.begin(), coeffs.end());
    ntt_.forward(evals);
    he::SlotMatrix m(n_);
    for (std::size_t k = 0; k < n_; ++k) m.values()[k] = evals[eval_index_[k]];
    return m;
  }

  const Modulus& modulus() const noexcept { return p_; }

 private:
  std::size_t n_;
  Modulus p_;
  NttTables ntt_;
  std::vector<std::size_t> eval_index_;
};

inline u64 galois_for_rotation(std::size_t r, std::size_t n) {
  const u64 two_n = 2 * n;
  u64 g = 1;
  for (std::size_t k = 0; k < r; ++k) g = g * 3 % two_n;
  return g;
}

inline u64 galois_for_row_swap(std::size_t n) { return 2 * n - 1; }

// X -> X^g on a coefficient vector mod q.
inline void apply_automorphism(std::span<const u64> in, std::span<u64> out, u64 g, const Modulus& q) {
  const std::size_t n = in.size();
  const u64 two_n = 2 * n;
  for (std::size_t j = 0; j < n; ++j) {
    const u64 target = static_cast<u64>(j) * g % two_n;
    if (target < n) {
      out[target] = in[j];
    } else {
      out[target - n] = q.neg(in[j]);
    }
  }
}

// Shared, immutable parameter data: the modulus chain, NTT tables and the
// slot encoder. Chain primes satisfy q = 1 (mod 2n p), so they are NTT
// friendly and q^{-1} = 1 (mod p), which makes modulus switching leave the
// message untouched.
class Context {
 public:
  static std::shared_ptr<const Context> create(const he::HeParams& params, unsigned decomp_bits = kDefaultDecompBits) {
    return std::shared_ptr<const Context>(new Context(params, decomp_bits));
  }

  const he::HeParams& params() const noexcept { return params_; }
  std::size_t n() const noexcept { return params_.n; }
  int max_level() const noexcept { return params_.max_level; }
  std::size_t prime_count() const noexcept { return primes_.size(); }
  const Modulus& prime(std::size_t i) const { return primes_[i]; }
  const NttTables& ntt(std::size_t i) const { return ntt_[i]; }
  const SlotEncoder& encoder() const noexcept { return encoder_; }
  unsigned decomp_bits() const noexcept { return decomp_bits_; }
  std::size_t digits_per_limb() const noexcept { return digits_; }
  // q_l^{-1} mod q_i for i < l.
  u64 inv_prime(std::size_t l, std::size_t i) const { return inv_last_[l][i]; }
  double log2_modulus(int level) const { return log2_q_[static_cast<std::size_t>(level)]; }

  std::vector<u64> chain() const {
    std::vector<u64> out;
    for (const auto& q : primes_) out.push_back(q.value());
    return out;
  }

  void to_ntt(RnsPoly& a) const {
    if (a.ntt_form) return;
    for (std::size_t i = 0; i < a.limbs; ++i) ntt_[i].forward(a.limb(i));
    a.ntt_form = true;
  }
  void from_ntt(RnsPoly& a) const {
    if (!a.ntt_form) return;
    for (std::size_t i = 0; i < a.limbs; ++i) ntt_[i].inverse(a.limb(i));
    a.ntt_form = false;
  }

  // Small signed coefficients lifted into every limb up to `limbs`.
  RnsPoly lift_signed(std::span<const i64> coeffs, std::size_t limbs) const {
    RnsPoly r(n(), limbs);
    for (std::size_t i = 0; i < limbs; ++i) {
      auto dst = r.limb(i);
      for (std::size_t k = 0; k < n(); ++k) dst[k] = primes_[i].from_signed(coeffs[k]);
    }
    return r;
  }

  // Plaintext slots as a ring element mod Q_l, centered lift of the mod-p
  // coefficients.
  RnsPoly lift_plaintext(const he::SlotMatrix& m, std::size_t limbs) const {
    const auto coeffs = encoder_.encode(m);
    std::vector<i64> centered(n());
    for (std::size_t k = 0; k < n(); ++k) centered[k] = encoder_.modulus().centered(coeffs[k]);
    return lift_signed(centered, limbs);
  }

 private:
  Context(const he::HeParams& params, unsigned decomp_bits)
      : params_(params), encoder_((params.validate(), params.n), params.p), decomp_bits_(decomp_bits) {
    if (decomp_bits_ < 1 || decomp_bits_ > 60) throw Error(Errc::kInvalidParams, "decomposition base out of range");
    const std::size_t count = static_cast<std::size_t>(params.max_level) + 1;
    const u128 step = u128{2 * params.n} * params.p;
    const u64 top = u64{1} << kChainPrimeBits;
    const u64 floor = u64{1} << (kChainPrimeBits - 8);
    std::vector<u64> found;
    if (step < top) {
      for (u64 k = static_cast<u64>((top - 1) / step); k > 0 && found.size() < count; --k) {
        const u64 q = static_cast<u64>(step * k + 1);
        if (q < floor) break;
        if (is_prime(q)) found.push_back(q);
      }
    }
    if (found.size() < count) {
      throw Error(Errc::kNoNttPrimes, "found " + std::to_string(found.size()) + " of " + std::to_string(count) +
                                          " primes = 1 mod 2np below 2^" + std::to_string(kChainPrimeBits));
    }
    // q_L is the largest; q_0 the smallest.
    for (std::size_t i = 0; i < count; ++i) {
      primes_.emplace_back(found[count - 1 - i]);
      ntt_.emplace_back(params.n, primes_.back());
    }
    digits_ = (kChainPrimeBits + decomp_bits_ - 1) / decomp_bits_;
    inv_last_.resize(count);
    for (std::size_t l = 0; l < count; ++l) {
      for (std::size_t i = 0; i < l; ++i) inv_last_[l].push_back(primes_[i].inv(primes_[l].value() % primes_[i].value()));
    }
    double acc = 0;
    for (std::size_t l = 0; l < count; ++l) {
      acc += std::log2(static_cast<double>(primes_[l].value()));
      log2_q_.push_back(acc);
    }
  }

  he::HeParams params_;
  SlotEncoder encoder_;
  unsigned decomp_bits_;
  std::size_t digits_ = 0;
  std::vector<Modulus> primes_;
  std::vector<NttTables> ntt_;
  std::vector<std::vector<u64>> inv_last_;
  std::vector<double> log2_q_;
};

namespace sample {

inline std::vector<i64> ternary(std::size_t n, std::mt19937_64& rng) {
  std::vector<i64> s(n);
  std::uniform_int_distribution<int> pick(-1, 1);
  for (auto& x : s) x = pick(rng);
  return s;
}

inline std::vector<i64> centered_binomial(std::size_t n, std::mt19937_64& rng, int eta = kNoiseEta) {
  std::vector<i64> e(n);
  for (auto& x : e) {
    const u64 bits = rng();
    const u64 mask = (u64{1} << eta) - 1;
    x = static_cast<i64>(__builtin_popcountll(bits & mask)) - static_cast<i64>(__builtin_popcountll((bits >> eta) & mask));
  }
  return e;
}

// Uniform element of R_Q, generated directly in NTT form.
inline RnsPoly uniform(const Context& ctx, std::size_t limbs, std::mt19937_64& rng) {
  RnsPoly r(ctx.n(), limbs, true);
  for (std::size_t i = 0; i < limbs; ++i) {
    std::uniform_int_distribution<u64> pick(0, ctx.prime(i).value() - 1);
    for (auto& x : r.limb(i)) x = pick(rng);
  }
  return r;
}

}  // namespace sample

}  // namespace hcpdq::bgv
