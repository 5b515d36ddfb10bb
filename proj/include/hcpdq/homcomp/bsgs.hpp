#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hcpdq/he/evaluator.hpp"
#include "hcpdq/homcomp/params.hpp"

namespace hcpdq::homcomp {

// Shape of the diagonal evaluation of an s x N matrix over width-(n/2)
// column blocks. Rows are padded to `period` = next power of two >= s and
// repeated periodically along the slot row, so `period` generalized diagonals
// per block cover every entry once the partial sums are folded with a
// rotate-and-sum by period, 2 period, ..., n/4.
struct BsgsShape {
  std::size_t slots_per_row = 0;
  std::size_t period = 0;
  std::size_t baby = 0;
  std::size_t giant = 0;
  std::size_t blocks = 0;

  // Row rotations per evaluation, pack step excluded.
  std::size_t rotations() const noexcept {
    std::size_t k = blocks * (baby - 1) + (giant - 1);
    for (std::size_t a = period; a < slots_per_row; a *= 2) ++k;
    return k;
  }

  friend bool operator==(const BsgsShape&, const BsgsShape&) = default;
};

// Baby count B is the power of two minimizing blocks (B - 1) + (period / B - 1);
// ties go to the smaller B, which needs fewer keys.
inline BsgsShape choose_shape(const CompressionParams& params) {
  params.validate();
  BsgsShape shape;
  shape.slots_per_row = params.slots_per_row();
  shape.period = next_power_of_two(params.s);
  shape.blocks = params.blocks();
  std::size_t best = ~std::size_t{0};
  for (std::size_t b = 1; b <= shape.period; b *= 2) {
    const std::size_t cost = shape.blocks * (b - 1) + (shape.period / b - 1);
    if (cost < best) {
      best = cost;
      shape.baby = b;
    }
  }
  shape.giant = shape.period / shape.baby;
  return shape;
}

// Exactly the rotation keys comp needs: baby steps 1..B-1, the giant step B,
// the fold amounts and the row swap used by packing.
inline he::RotationSet required_rotations(const CompressionParams& params) {
  const BsgsShape shape = choose_shape(params);
  he::RotationSet rot;
  rot.column = true;
  for (std::size_t b = 1; b < shape.baby; ++b) rot.row_amounts.insert(b);
  if (shape.giant > 1 && shape.baby < shape.slots_per_row) rot.row_amounts.insert(shape.baby);
  for (std::size_t a = shape.period; a < shape.slots_per_row; a *= 2) rot.row_amounts.insert(a);
  return rot;
}

// Diagonal plaintexts for evaluating `top` on row 0 and `bottom` on row 1 of
// each packed block. Both matrices are s x N.
class BsgsPlan {
 public:
  BsgsPlan() = default;

  static BsgsPlan build(const CompressionParams& params, const DenseMatrix& top, const DenseMatrix& bottom) {
    BsgsPlan plan;
    plan.params_ = params;
    plan.shape_ = choose_shape(params);
    for (const DenseMatrix* M : {&top, &bottom}) {
      if (M->rows() != params.s || M->cols() != params.N) {
        throw Error(Errc::kInvalidParams, "matrix must be s x N");
      }
    }
    const auto& sh = plan.shape_;
    const std::size_t m = sh.slots_per_row;
    const std::size_t n = params.he.n;
    plan.diagonals_.reserve(sh.blocks * sh.period);
    std::vector<u64> diag(m);
    for (std::size_t blk = 0; blk < sh.blocks; ++blk) {
      for (std::size_t g = 0; g < sh.giant; ++g) {
        for (std::size_t b = 0; b < sh.baby; ++b) {
          const std::size_t k = g * sh.baby + b;
          he::SlotMatrix pt(n);
          for (std::size_t row = 0; row < 2; ++row) {
            const DenseMatrix& M = row == 0 ? top : bottom;
            for (std::size_t t = 0; t < m; ++t) {
              const std::size_t j = t % sh.period;
              const std::size_t col = blk * m + (t + k) % m;
              diag[t] = (j < params.s && col < params.N) ? M.at(j, col) : 0;
            }
            // Stored pre-rotated by -gB so the giant rotation can be hoisted
            // out of the baby-step sum.
            const std::size_t shift = (g * sh.baby) % m;
            for (std::size_t t = 0; t < m; ++t) pt.at(row, t) = diag[(t + m - shift) % m];
          }
          plan.diagonals_.push_back(std::move(pt));
        }
      }
    }
    plan.output_mask_ = he::SlotMatrix(n);
    for (std::size_t row = 0; row < 2; ++row) {
      for (std::size_t t = 0; t < params.s; ++t) plan.output_mask_.at(row, t) = 1;
    }
    return plan;
  }

  const CompressionParams& params() const noexcept { return params_; }
  const BsgsShape& shape() const noexcept { return shape_; }
  const he::SlotMatrix& diagonal(std::size_t block, std::size_t giant, std::size_t baby) const {
    return diagonals_[(block * shape_.giant + giant) * shape_.baby + baby];
  }
  const he::SlotMatrix& output_mask() const noexcept { return output_mask_; }
  he::RotationSet rotations() const { return required_rotations(params_); }

 private:
  CompressionParams params_;
  BsgsShape shape_;
  std::vector<he::SlotMatrix> diagonals_;
  he::SlotMatrix output_mask_;
};

// Row 0 of the result holds top * (row-0 inputs) and row 1 holds
// bottom * (row-1 inputs), each in slots [0, s); every other slot is zero.
// `blocks[k]` carries column block k of the matrix in each row.
template <he::HeBackend B>
typename B::Ciphertext bsgs_matvec(he::Evaluator<B>& ev, const BsgsPlan& plan,
                                   std::span<const typename B::Ciphertext> blocks) {
  using Ct = typename B::Ciphertext;
  const auto& sh = plan.shape();
  if (blocks.size() != sh.blocks) throw Error(Errc::kInvalidParams, "block count does not match the plan");

  // Baby steps, shared by all giant steps.
  std::vector<std::vector<Ct>> baby(sh.blocks);
  for (std::size_t blk = 0; blk < sh.blocks; ++blk) {
    baby[blk].push_back(blocks[blk]);
    for (std::size_t b = 1; b < sh.baby; ++b) baby[blk].push_back(ev.rot_row(blocks[blk], b));
  }

  std::optional<Ct> digest;
  for (std::size_t g = sh.giant; g-- > 0;) {
    std::optional<Ct> inner;
    for (std::size_t blk = 0; blk < sh.blocks; ++blk) {
      for (std::size_t b = 0; b < sh.baby; ++b) {
        Ct term = ev.mul_plain(baby[blk][b], plan.diagonal(blk, g, b));
        inner = inner ? ev.add(*inner, term) : std::move(term);
      }
    }
    digest = digest ? ev.add(ev.rot_row(*digest, sh.baby), *inner) : std::move(*inner);
  }

  Ct acc = std::move(*digest);
  for (std::size_t a = sh.period; a < sh.slots_per_row; a *= 2) acc = ev.add(acc, ev.rot_row(acc, a));
  return ev.mul_plain(acc, plan.output_mask());
}

// Two-row packing of the standard-layout ciphertexts of v (and optionally d)
// into matrix blocks: block 2c = [v_first; d_first], block 2c+1 =
// [v_second; d_second] of input ciphertext c. Without d the bottom rows are
// zero. Blocks starting at or beyond N are dropped.
template <he::HeBackend B>
std::vector<typename B::Ciphertext> pack_pair(he::Evaluator<B>& ev, const CompressionParams& params,
                                              std::span<const typename B::Ciphertext> cv,
                                              std::optional<std::span<const typename B::Ciphertext>> cd) {
  using Ct = typename B::Ciphertext;
  const std::size_t n = params.he.n;
  const std::size_t m = params.slots_per_row();
  if (cv.size() != params.input_ciphertexts() || (cd && cd->size() != cv.size())) {
    throw Error(Errc::kInvalidParams, "expected " + std::to_string(params.input_ciphertexts()) + " input ciphertexts");
  }
  he::SlotMatrix top_ones(n), bottom_ones(n);
  for (std::size_t t = 0; t < m; ++t) {
    top_ones.at(0, t) = 1;
    bottom_ones.at(1, t) = 1;
  }
  std::vector<Ct> blocks;
  for (std::size_t c = 0; c < cv.size(); ++c) {
    Ct first = ev.mul_plain(cv[c], top_ones);
    if (cd) first = ev.add(first, ev.rot_col(ev.mul_plain((*cd)[c], top_ones)));
    blocks.push_back(std::move(first));
    if (c * n + m >= params.N) continue;
    Ct second = ev.rot_col(ev.mul_plain(cv[c], bottom_ones));
    if (cd) second = ev.add(second, ev.mul_plain((*cd)[c], bottom_ones));
    blocks.push_back(std::move(second));
  }
  return blocks;
}

}  // namespace hcpdq::homcomp
