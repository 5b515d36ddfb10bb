#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcpdq/error.hpp"

namespace hcpdq::io {

// Little-endian byte builder.
class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void raw(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + len);
  }
  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void words(std::span<const std::uint64_t> w) {
    for (auto x : w) u64(x);
  }

  std::size_t size() const noexcept { return buf_.size(); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int len) {
    for (int i = 0; i < len; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked reader; truncation is a Format error.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::span<const std::uint8_t> raw(std::size_t len) {
    need(len);
    auto out = data_.subspan(pos_, len);
    pos_ += len;
    return out;
  }
  std::vector<std::uint64_t> words(std::size_t count) {
    if (count > remaining() / 8) throw Error(Errc::kFormat, "truncated input");
    std::vector<std::uint64_t> out(count);
    for (auto& x : out) x = u64();
    return out;
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  void expect_end() const {
    if (pos_ != data_.size()) throw Error(Errc::kFormat, std::to_string(remaining()) + " trailing bytes");
  }

 private:
  void need(std::size_t len) const {
    if (len > remaining()) throw Error(Errc::kFormat, "truncated input");
  }
  std::uint64_t get(int len) {
    need(static_cast<std::size_t>(len));
    std::uint64_t v = 0;
    for (int i = 0; i < len; ++i) v |= std::uint64_t{data_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
    pos_ += static_cast<std::size_t>(len);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace hcpdq::io
