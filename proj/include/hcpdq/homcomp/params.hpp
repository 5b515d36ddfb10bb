#pragma once

#include <span>
#include <string>
#include <vector>

#include "hcpdq/he/types.hpp"
#include "hcpdq/zp/field.hpp"

namespace hcpdq::homcomp {

// Vector length N, sparsity bound s and the HE parameters the compressed
// payload lives under.
struct CompressionParams {
  std::size_t N = 0;
  std::size_t s = 0;
  he::HeParams he;

  void validate() const {
    he.validate();
    if (s < 1) throw Error(Errc::kInvalidParams, "sparsity bound s must be at least 1");
    if (N < 1) throw Error(Errc::kInvalidParams, "vector length N must be at least 1");
    if (he.p <= N) {
      throw Error(Errc::kModulusTooSmall, "p = " + std::to_string(he.p) + " must exceed N = " + std::to_string(N));
    }
    if (2 * s > he.n) {
      throw Error(Errc::kInvalidParams, "2s = " + std::to_string(2 * s) + " exceeds the slot count n = " +
                                            std::to_string(he.n));
    }
  }

  std::size_t slots_per_row() const noexcept { return he.n / 2; }
  // Ciphertexts of a length-N vector in the standard layout.
  std::size_t input_ciphertexts() const noexcept { return (N + he.n - 1) / he.n; }
  // Width-(n/2) column blocks of the s x N matrix.
  std::size_t blocks() const noexcept { return (N + slots_per_row() - 1) / slots_per_row(); }

  friend bool operator==(const CompressionParams&, const CompressionParams&) = default;
};

// Row-major matrix over Z_p; rows and columns 0-based.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  u64& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  u64 at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  // Plain matrix-vector product, the reference the homomorphic path is checked against.
  std::vector<u64> apply(std::span<const u64> x, const Modulus& p) const {
    if (x.size() != cols_) throw Error(Errc::kInvalidParams, "vector length does not match the matrix width");
    std::vector<u64> y(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) {
        if (x[c] != 0) y[r] = p.add(y[r], p.mul(at(r, c), x[c]));
      }
    }
    return y;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<u64> data_;
};

// s x N power matrix: row j (0-based) holds (i+1)^(j+1).
inline DenseMatrix build_vandermonde(const CompressionParams& params) {
  if (params.he.p <= params.N) throw Error(Errc::kModulusTooSmall, "p must exceed N");
  const Modulus p(params.he.p);
  DenseMatrix C(params.s, params.N);
  for (std::size_t i = 0; i < params.N; ++i) {
    const u64 base = p.reduce(i + 1);
    u64 power = base;
    for (std::size_t j = 0; j < params.s; ++j) {
      C.at(j, i) = power;
      power = p.mul(power, base);
    }
  }
  return C;
}

// D = C diag(db): column i of the power matrix scaled by db_i.
inline DenseMatrix precompute_masked_matrix(std::span<const u64> db, const CompressionParams& params) {
  if (db.size() != params.N) throw Error(Errc::kInvalidParams, "database length differs from N");
  const Modulus p(params.he.p);
  DenseMatrix D = build_vandermonde(params);
  for (std::size_t i = 0; i < params.N; ++i) {
    if (db[i] >= p.value()) throw Error(Errc::kInvalidParams, "database value not reduced mod p");
    for (std::size_t j = 0; j < params.s; ++j) D.at(j, i) = p.mul(D.at(j, i), db[i]);
  }
  return D;
}

}  // namespace hcpdq::homcomp
