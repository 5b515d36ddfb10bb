#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hcpdq/arith.hpp"

namespace hcpdq::zp {

// Strictly increasing 1-based positions.
class IndexSet {
 public:
  IndexSet() = default;

  explicit IndexSet(std::vector<u64> indices) : indices_(std::move(indices)) {
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      if (indices_[k] == 0) throw Error(Errc::kInvalidParams, "indices are 1-based");
      if (k > 0 && indices_[k] <= indices_[k - 1]) {
        throw Error(Errc::kInvalidParams, "index set must be strictly increasing");
      }
    }
  }

  static IndexSet from_unsorted(std::vector<u64> indices) {
    std::sort(indices.begin(), indices.end());
    return IndexSet(std::move(indices));
  }

  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  const std::vector<u64>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }
  u64 operator[](std::size_t k) const { return indices_[k]; }

  bool contains(u64 i) const { return std::binary_search(indices_.begin(), indices_.end(), i); }

  // 0/1 vector of the given length.
  std::vector<u64> indicator(std::size_t length) const {
    std::vector<u64> v(length, 0);
    for (u64 i : indices_) {
      if (i > length) throw Error(Errc::kInvalidParams, "index exceeds vector length");
      v[i - 1] = 1;
    }
    return v;
  }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<u64> indices_;
};

struct SparseEntry {
  u64 index;  // 1-based
  u64 value;  // nonzero
  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Length-N vector over Z_p stored as its nonzero entries, sorted by index.
class SparseVector {
 public:
  SparseVector() = default;

  SparseVector(std::size_t length, std::vector<SparseEntry> entries)
      : length_(length), entries_(std::move(entries)) {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      const auto& e = entries_[k];
      if (e.index == 0 || e.index > length_) throw Error(Errc::kInvalidParams, "entry index out of range");
      if (e.value == 0) throw Error(Errc::kInvalidParams, "sparse entries must be nonzero");
      if (k > 0 && e.index <= entries_[k - 1].index) {
        throw Error(Errc::kInvalidParams, "entries must be sorted by distinct index");
      }
    }
  }

  static SparseVector from_dense(std::span<const u64> dense) {
    std::vector<SparseEntry> entries;
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if (dense[i] != 0) entries.push_back({i + 1, dense[i]});
    }
    return SparseVector(dense.size(), std::move(entries));
  }

  std::size_t length() const noexcept { return length_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }
  const std::vector<SparseEntry>& entries() const noexcept { return entries_; }

  IndexSet support() const {
    std::vector<u64> idx;
    idx.reserve(entries_.size());
    for (const auto& e : entries_) idx.push_back(e.index);
    return IndexSet(std::move(idx));
  }

  std::vector<u64> to_dense() const {
    std::vector<u64> v(length_, 0);
    for (const auto& e : entries_) v[e.index - 1] = e.value;
    return v;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t length_ = 0;
  std::vector<SparseEntry> entries_;
};

}  // namespace hcpdq::zp
