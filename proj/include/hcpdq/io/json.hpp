#pragma once

#include <algorithm>
#include <string>

#include <json.hpp>

#include "hcpdq/zp/sparse.hpp"

namespace hcpdq::io {

// {"entries":[[i,v],...],"length":N}, indices 1-based. dump() of this object
// is the canonical text form (keys sorted, no whitespace).
inline nlohmann::json sparse_to_json(const zp::SparseVector& v) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : v.entries()) entries.push_back({e.index, e.value});
  return {{"length", v.length()}, {"entries", entries}};
}

// Entries may come in any order; values are reduced mod p and zeros dropped.
inline zp::SparseVector sparse_from_json(const nlohmann::json& j, u64 p) {
  try {
    const std::size_t length = j.at("length").get<std::size_t>();
    std::vector<zp::SparseEntry> entries;
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() != 2) throw Error(Errc::kFormat, "entry must be [index, value]");
      const u64 value = e[1].get<u64>() % p;
      if (value != 0) entries.push_back({e[0].get<u64>(), value});
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    return zp::SparseVector(length, std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kFormat, std::string("sparse vector JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::kFormat) throw;
    throw Error(Errc::kFormat, e.what());
  }
}

}  // namespace hcpdq::io
