#pragma once

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hcpdq/app/service.hpp"
#include "hcpdq/io/serialize.hpp"

namespace hcpdq::app {

inline constexpr const char* kBenchHeader =
    "N,s,backend,comp_keyswitches,comp_pt_mults,comp_wall_ms,decomp_zp_ops,decomp_wall_ms,payload_bytes";

struct BenchRow {
  std::size_t N = 0;
  std::size_t s = 0;
  he::BackendId backend = he::BackendId::kSimulator;
  std::uint64_t comp_keyswitches = 0;
  std::uint64_t comp_pt_mults = 0;
  double comp_wall_ms = 0;
  std::uint64_t decomp_zp_ops = 0;
  double decomp_wall_ms = 0;
  std::size_t payload_bytes = 0;
  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

struct BenchConfig {
  std::size_t n = 8192;
  u64 p = 65537;
  std::uint64_t seed = 1;
  // Timing columns written as 0 so equal seeds give equal files.
  bool deterministic = false;
};

// The planted vector depends only on (seed, s) and its support lies in the
// first min(N, 2^13) positions, so runs that differ only in N decompress the
// same payload.
inline std::vector<u64> bench_vector(std::size_t N, std::size_t s, u64 p, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 1000003 + s);
  const std::size_t span = std::min<std::size_t>(N, 8192);
  std::set<std::size_t> pos;
  while (pos.size() < std::min(s, span)) pos.insert(rng() % span);
  std::vector<u64> d(N, 0);
  for (auto i : pos) d[i] = 1 + rng() % (p - 1);
  return d;
}

template <he::HeBackend B>
BenchRow bench_point(std::size_t N, std::size_t s, const BenchConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const homcomp::CompressionParams params{N, s, {cfg.n, cfg.p, 3}};
  params.validate();
  const auto keys = B::keygen(params.he, homcomp::required_rotations(params), cfg.seed);
  const auto C = homcomp::build_vandermonde(params);
  const auto plan = homcomp::BsgsPlan::build(params, C, C);
  std::mt19937_64 rng(query_seed(cfg.seed));

  const auto d = bench_vector(N, s, cfg.p, cfg.seed);
  std::vector<u64> v(N);
  for (std::size_t i = 0; i < N; ++i) v[i] = d[i] != 0;
  const auto cd = homcomp::encrypt_vector<B>(d, keys, rng);
  const auto cv = homcomp::encrypt_vector<B>(v, keys, rng);

  he::Evaluator<B> ev(keys);
  const auto t0 = Clock::now();
  const auto ans = homcomp::comp<B>(ev, plan, cd, std::span<const typename B::Ciphertext>(cv));
  const auto t1 = Clock::now();

  const auto [w, e] = homcomp::open_answer<B>(ans, keys);
  zp::OpCount ops;
  const auto t2 = Clock::now();
  const auto got = homcomp::decomp_payload(w, e, params, &ops);
  const auto t3 = Clock::now();
  if (got.to_dense() != d) throw Error(Errc::kInconsistentSystem, "benchmark round trip failed");

  auto ms = [](auto a, auto b) { return std::chrono::duration<double, std::milli>(b - a).count(); };
  BenchRow row;
  row.N = N;
  row.s = s;
  row.backend = B::kId;
  row.comp_keyswitches = ev.counters().keyswitches;
  row.comp_pt_mults = ev.counters().pt_mults;
  row.comp_wall_ms = cfg.deterministic ? 0 : ms(t0, t1);
  row.decomp_zp_ops = ops.total();
  row.decomp_wall_ms = cfg.deterministic ? 0 : ms(t2, t3);
  row.payload_bytes = io::serialize_answer<B>(ans).size();
  return row;
}

inline void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kBenchHeader << '\n';
  for (const auto& r : rows) {
    out << r.N << ',' << r.s << ',' << he::backend_name(r.backend) << ',' << r.comp_keyswitches << ','
        << r.comp_pt_mults << ',' << std::fixed << std::setprecision(3) << r.comp_wall_ms << ',' << r.decomp_zp_ops
        << ',' << r.decomp_wall_ms << ',' << r.payload_bytes << '\n';
    out.unsetf(std::ios::fixed);
  }
}

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Rows varying s at fixed N: K(s) non-decreasing and K(max s)/K(min s) <= 6.
inline std::vector<Verdict> verdicts_vary_s(const std::vector<BenchRow>& rows) {
  std::vector<Verdict> out;
  if (rows.size() < 2) return out;
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].comp_keyswitches >= rows[i - 1].comp_keyswitches;
  out.push_back({"keyswitch_monotone", monotone, ""});
  const double ratio = static_cast<double>(rows.back().comp_keyswitches) / static_cast<double>(rows.front().comp_keyswitches);
  std::ostringstream ss;
  ss << "K(" << rows.back().s << ")/K(" << rows.front().s << ") = " << ratio;
  out.push_back({"keyswitch_sublinear", ratio <= 6.0, ss.str()});
  return out;
}

// Rows varying N at fixed s: decomp op counts and payload size constant.
inline std::vector<Verdict> verdicts_vary_n(const std::vector<BenchRow>& rows) {
  std::vector<Verdict> out;
  if (rows.size() < 2) return out;
  bool ops = true, bytes = true;
  for (const auto& r : rows) {
    ops = ops && r.decomp_zp_ops == rows.front().decomp_zp_ops;
    bytes = bytes && r.payload_bytes == rows.front().payload_bytes;
  }
  out.push_back({"decomp_ops_independent_of_N", ops, std::to_string(rows.front().decomp_zp_ops) + " ops"});
  out.push_back({"payload_size_independent_of_N", bytes, std::to_string(rows.front().payload_bytes) + " bytes"});
  return out;
}

}  // namespace hcpdq::app
