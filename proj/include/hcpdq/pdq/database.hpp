#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcpdq/arith.hpp"
#include "hcpdq/error.hpp"
#include "hcpdq/io/bytes.hpp"

namespace hcpdq::pdq {

struct Record {
  u64 key = 0;
  u64 value = 0;
  friend bool operator==(const Record&, const Record&) = default;
};

inline constexpr char kDbMagic[4] = {'H', 'C', 'D', 'B'};
inline constexpr std::uint16_t kDbVersion = 1;

// Cleartext key-value table. Record i is index i+1 in query results. Values
// live in [1, p-1] so that masking never erases a match.
class Database {
 public:
  Database() = default;
  explicit Database(std::vector<Record> records) : records_(std::move(records)) {}

  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<Record>& records() const noexcept { return records_; }
  const Record& operator[](std::size_t i) const { return records_[i]; }

  void validate(u64 p) const {
    if (records_.empty()) throw Error(Errc::kInvalidParams, "database is empty");
    if (records_.size() > p - 1) {
      throw Error(Errc::kModulusTooSmall, std::to_string(records_.size()) + " records need p > N, p = " +
                                              std::to_string(p));
    }
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (r.key >= p) throw Error(Errc::kInvalidParams, "record " + std::to_string(i + 1) + ": key not below p");
      if (r.value == 0 || r.value >= p) {
        throw Error(Errc::kInvalidParams, "record " + std::to_string(i + 1) + ": value outside [1, p-1]");
      }
    }
  }

  // JSON lines, one {"key": k, "value": v} per line; blank lines skipped.
  static Database read_jsonl(std::istream& in) {
    std::vector<Record> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        out.push_back({j.at("key").get<u64>(), j.at("value").get<u64>()});
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::kFormat, "line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    return Database(std::move(out));
  }

  void write_jsonl(std::ostream& out) const {
    for (const auto& r : records_) out << nlohmann::json{{"key", r.key}, {"value", r.value}}.dump() << '\n';
  }

  // "HCDB", u16 version, u64 N, then N keys and N values, all little-endian.
  std::vector<std::uint8_t> to_hcdb() const {
    io::Writer w;
    w.raw(kDbMagic, 4);
    w.u16(kDbVersion);
    w.u64(records_.size());
    for (const auto& r : records_) w.u64(r.key);
    for (const auto& r : records_) w.u64(r.value);
    return w.take();
  }

  static Database from_hcdb(std::span<const std::uint8_t> bytes) {
    io::Reader r(bytes);
    if (std::memcmp(r.raw(4).data(), kDbMagic, 4) != 0) throw Error(Errc::kFormat, "not an HCDB file");
    if (const auto v = r.u16(); v != kDbVersion) throw Error(Errc::kFormat, "HCDB version " + std::to_string(v));
    const u64 n = r.u64();
    if (n > r.remaining() / 16) throw Error(Errc::kFormat, "HCDB record count exceeds the file size");
    std::vector<Record> out(n);
    for (auto& rec : out) rec.key = r.u64();
    for (auto& rec : out) rec.value = r.u64();
    r.expect_end();
    return Database(std::move(out));
  }

  // Format picked by the leading magic.
  static Database load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::kIo, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kDbMagic, 4) == 0) return from_hcdb(bytes);
    std::string text(bytes.begin(), bytes.end());
    std::istringstream ss(text);
    return read_jsonl(ss);
  }

  friend bool operator==(const Database&, const Database&) = default;

 private:
  std::vector<Record> records_;
};

}  // namespace hcpdq::pdq
