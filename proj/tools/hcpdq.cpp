// hcpdq: key generation, compression, PDQ server/client and benchmarks.
//
// Exit codes: 0 ok, 1 usage or parameters, 2 I/O or file format,
// 3 payload did not decode (sparsity bound exceeded), 4 anything else.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hcpdq/app/bench.hpp"
#include "hcpdq/app/service.hpp"
#include "hcpdq/io/json.hpp"
#include "hcpdq/io/serialize.hpp"

namespace {

using namespace hcpdq;
using Sim = he::sim::Backend;
using Bgv = bgv::Backend;

int exit_code(Errc c) {
  switch (c) {
    case Errc::kInvalidParams:
    case Errc::kModulusTooSmall:
    case Errc::kNoNttPrimes:
      return 1;
    case Errc::kIo:
    case Errc::kFormat:
    case Errc::kBackendMismatch:
      return 2;
    case Errc::kNotFullySplit:
    case Errc::kSingularSystem:
    case Errc::kInconsistentSystem:
    case Errc::kQueryOverflow:
      return 3;
    default:
      return 4;
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("HCPDQ_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(Errc::kInvalidParams, "HCPDQ_SEED is not an unsigned integer");
    }
  }
  return (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIo, "cannot write " + path);
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw Error(Errc::kIo, "cannot write " + path);
}

he::BackendId parse_backend(const std::string& name) {
  if (name == "sim") return he::BackendId::kSimulator;
  if (name == "bgv") return he::BackendId::kBgvMini;
  throw Error(Errc::kInvalidParams, "backend must be sim or bgv");
}

template <class F>
auto with_backend(he::BackendId id, F&& f) {
  if (id == he::BackendId::kSimulator) return f.template operator()<Sim>();
  return f.template operator()<Bgv>();
}

void print_counters(const he::OpCounters& c) {
  std::cerr << "keyswitches=" << c.keyswitches << " ct_mults=" << c.ct_mults << " pt_mults=" << c.pt_mults
            << " adds=" << c.adds << '\n';
}

struct KeygenOpts {
  std::size_t n = 8192, N = 16384, s = 16;
  u64 p = 65537;
  int levels = 3;
  std::string backend = "sim", out;
  std::optional<std::uint64_t> seed;
};

void cmd_keygen(const KeygenOpts& o) {
  const homcomp::CompressionParams params{o.N, o.s, {o.n, o.p, o.levels}};
  params.validate();
  const auto seed = resolve_seed(o.seed);
  with_backend(parse_backend(o.backend), [&]<class B>() {
    const auto keys = B::keygen(params.he, homcomp::required_rotations(params), seed);
    write_file(o.out + ".pub", io::serialize_keys<B>(keys.public_part()));
    write_file(o.out + ".sec", io::serialize_keys<B>(keys.secret_part()));
    std::cerr << "wrote " << o.out << ".pub and " << o.out << ".sec (" << he::backend_name(B::kId) << ", n=" << o.n
              << ", p=" << o.p << ", levels=" << o.levels << ")\n";
  });
}

struct CompressOpts {
  std::string in, keys, out;
  std::size_t s = 16;
  std::optional<std::uint64_t> seed;
};

void cmd_compress(const CompressOpts& o) {
  const auto key_bytes = read_file(o.keys);
  const auto text = read_file(o.in);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kFormat, std::string("input JSON: ") + e.what());
  }
  std::mt19937_64 rng(app::query_seed(resolve_seed(o.seed)));
  with_backend(io::peek_backend(key_bytes), [&]<class B>() {
    const auto keys = io::parse_keys<B>(key_bytes);
    const auto vec = io::sparse_from_json(j, keys.params().p);
    const homcomp::CompressionParams params{vec.length(), o.s, keys.params()};
    params.validate();
    const auto d = vec.to_dense();
    std::vector<u64> v(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) v[i] = d[i] != 0;
    const auto cd = homcomp::encrypt_vector<B>(d, keys, rng);
    const auto cv = homcomp::encrypt_vector<B>(v, keys, rng);
    const auto C = homcomp::build_vandermonde(params);
    const auto plan = homcomp::BsgsPlan::build(params, C, C);
    he::Evaluator<B> ev(keys);
    const auto ans = homcomp::comp<B>(ev, plan, cd, std::span<const typename B::Ciphertext>(cv));
    const auto bytes = io::serialize_answer<B>(ans);
    write_file(o.out, bytes);
    std::cerr << "compressed N=" << params.N << " into " << ans.ciphertexts.size() << " ciphertext(s), "
              << bytes.size() << " bytes; ";
    print_counters(ev.counters());
  });
}

struct DecompressOpts {
  std::string in, keys, out = "-";
  std::size_t length = 0;
};

void cmd_decompress(const DecompressOpts& o) {
  const auto key_bytes = read_file(o.keys);
  const auto ans_bytes = read_file(o.in);
  with_backend(io::peek_backend(key_bytes), [&]<class B>() {
    const auto keys = io::parse_keys<B>(key_bytes);
    const auto ans = io::parse_answer<B>(ans_bytes);
    const homcomp::CompressionParams params{o.length, ans.layout.s, keys.params()};
    params.validate();
    zp::OpCount ops;
    const auto vec = homcomp::decomp<B>(ans, keys, params, &ops);
    write_text(o.out, io::sparse_to_json(vec).dump() + "\n");
    std::cerr << "recovered " << vec.nonzeros() << " nonzeros; zp adds=" << ops.adds << " muls=" << ops.muls
              << " invs=" << ops.invs << '\n';
  });
}

struct ServeOpts {
  std::uint16_t port = 7700;
  std::string db, backend = "sim", record;
  std::size_t s = 16, n = 8192, sessions = 0;
  u64 p = 65537;
  bool loopback = false;
};

void cmd_serve(const ServeOpts& o) {
  auto db = pdq::Database::load(o.db);
  db.validate(o.p);
  const auto params = pdq::pdq_params(db.size(), o.s, o.n, o.p);
  std::optional<io::Recorder> rec;
  if (!o.record.empty()) rec.emplace(o.record);
  with_backend(parse_backend(o.backend), [&]<class B>() {
    app::PdqServer<B> server(std::move(db), params, rec ? &*rec : nullptr);
    const auto listener = io::listen_tcp(o.port, o.loopback);
    std::cout << "listening on port " << io::local_port(listener) << std::endl;
    server.serve(listener, o.sessions);
  });
}

struct QueryOpts {
  std::string host = "127.0.0.1", backend = "sim", record;
  std::uint16_t port = 7700;
  std::vector<u64> xs;
  std::optional<std::uint64_t> seed;
};

void cmd_query(const QueryOpts& o) {
  std::optional<io::Recorder> rec;
  if (!o.record.empty()) rec.emplace(o.record);
  with_backend(parse_backend(o.backend), [&]<class B>() {
    auto client = app::PdqClient<B>::connect(o.host, o.port, resolve_seed(o.seed), rec ? &*rec : nullptr);
    for (u64 x : o.xs) {
      auto j = client.query(x).result.to_json();
      j["x"] = x;
      std::cout << j.dump() << std::endl;
    }
  });
}

struct BenchOpts {
  std::string vary = "s", backend = "sim", out = "-";
  std::vector<std::size_t> values;
  std::optional<std::size_t> fixed;
  std::size_t n = 8192;
  std::optional<u64> p;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
};

// p must exceed N; the N grid reaches 2^17, past 65537.
inline constexpr u64 kLargeBenchPrime = 786433;

int cmd_bench(const BenchOpts& o) {
  if (o.vary != "s" && o.vary != "N") throw Error(Errc::kInvalidParams, "--vary must be s or N");
  const bool vary_s = o.vary == "s";
  auto values = o.values;
  if (values.empty()) {
    values = vary_s ? std::vector<std::size_t>{8, 16, 32, 64, 128}
                    : std::vector<std::size_t>{1 << 13, 1 << 14, 1 << 15, 1 << 16, 1 << 17};
  }
  const std::size_t fixed = o.fixed.value_or(vary_s ? 16384 : 16);
  u64 p = 65537;
  if (o.p) {
    p = *o.p;
  } else if (!vary_s && *std::max_element(values.begin(), values.end()) >= p) {
    p = kLargeBenchPrime;
  }
  const app::BenchConfig cfg{o.n, p, resolve_seed(o.seed), o.deterministic};
  std::vector<app::BenchRow> rows;
  with_backend(parse_backend(o.backend), [&]<class B>() {
    for (auto v : values) rows.push_back(app::bench_point<B>(vary_s ? fixed : v, vary_s ? v : fixed, cfg));
  });
  std::ostringstream csv;
  app::write_csv(csv, rows);
  write_text(o.out, csv.str());
  const auto verdicts = vary_s ? app::verdicts_vary_s(rows) : app::verdicts_vary_n(rows);
  auto& log = o.out == "-" ? std::cerr : std::cout;
  bool ok = true;
  for (const auto& v : verdicts) {
    log << (v.pass ? "PASS " : "FAIL ") << v.name << (v.detail.empty() ? "" : " (" + v.detail + ")") << '\n';
    ok = ok && v.pass;
  }
  return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"SIMD-aware homomorphic compression of sparse vectors and private database queries"};
  cli.require_subcommand(1);

  KeygenOpts kg;
  auto* keygen = cli.add_subcommand("keygen", "generate a key set; writes <out>.pub and <out>.sec");
  keygen->add_option("--n", kg.n, "ring dimension (power of two)")->capture_default_str();
  keygen->add_option("--p", kg.p, "plaintext prime, 1 mod 2n")->capture_default_str();
  keygen->add_option("--levels", kg.levels, "multiplicative levels of fresh ciphertexts")->capture_default_str();
  keygen->add_option("--N", kg.N, "vector length the rotation keys are planned for")->capture_default_str();
  keygen->add_option("--s", kg.s, "sparsity bound the rotation keys are planned for")->capture_default_str();
  keygen->add_option("--backend", kg.backend, "sim or bgv")->capture_default_str();
  keygen->add_option("--out", kg.out, "output path prefix")->required();
  keygen->add_option("--seed", kg.seed, "RNG seed (default: HCPDQ_SEED or random)");

  CompressOpts co;
  auto* compress = cli.add_subcommand("compress", "encrypt a sparse vector and compress it");
  compress->add_option("--in", co.in, "sparse vector JSON")->required();
  compress->add_option("--keys", co.keys, "public key file")->required();
  compress->add_option("--s", co.s, "sparsity bound")->capture_default_str();
  compress->add_option("--out", co.out, "answer file")->required();
  compress->add_option("--seed", co.seed, "RNG seed (default: HCPDQ_SEED or random)");

  DecompressOpts de;
  auto* decompress = cli.add_subcommand("decompress", "decrypt and decompress an answer");
  decompress->add_option("--in", de.in, "answer file")->required();
  decompress->add_option("--keys", de.keys, "secret key file")->required();
  decompress->add_option("--length", de.length, "original vector length N")->required();
  decompress->add_option("--out", de.out, "sparse vector JSON, - for stdout")->capture_default_str();

  ServeOpts sv;
  auto* serve = cli.add_subcommand("serve", "answer PDQ queries over TCP");
  serve->add_option("--port", sv.port, "TCP port, 0 for any free port")->capture_default_str();
  serve->add_option("--db", sv.db, "database, JSON lines or HCDB")->required();
  serve->add_option("--s", sv.s, "sparsity bound agreed with clients")->capture_default_str();
  serve->add_option("--n", sv.n, "ring dimension")->capture_default_str();
  serve->add_option("--p", sv.p, "plaintext prime")->capture_default_str();
  serve->add_option("--backend", sv.backend, "sim or bgv")->capture_default_str();
  serve->add_option("--record", sv.record, "dump raw frames to this file");
  serve->add_option("--sessions", sv.sessions, "exit after this many connections (0: run forever)");
  serve->add_flag("--loopback", sv.loopback, "bind 127.0.0.1 only");

  QueryOpts qo;
  auto* query = cli.add_subcommand("query", "run PDQ queries against a server");
  query->add_option("--host", qo.host)->capture_default_str();
  query->add_option("--port", qo.port)->capture_default_str();
  query->add_option("--x", qo.xs, "condition key(s)")->required();
  query->add_option("--backend", qo.backend, "sim or bgv")->capture_default_str();
  query->add_option("--seed", qo.seed, "RNG seed (default: HCPDQ_SEED or random)");
  query->add_option("--record", qo.record, "dump raw frames to this file");

  BenchOpts bo;
  auto* bench = cli.add_subcommand("bench", "compression benchmark grid as CSV");
  bench->add_option("--vary", bo.vary, "s or N")->capture_default_str();
  bench->add_option("--values", bo.values, "grid values (default 8..128 for s, 2^13..2^17 for N)");
  bench->add_option("--fixed", bo.fixed, "the other parameter (default N=16384 or s=16)");
  bench->add_option("--backend", bo.backend, "sim or bgv")->capture_default_str();
  bench->add_option("--n", bo.n, "ring dimension")->capture_default_str();
  bench->add_option("--p", bo.p, "plaintext prime (default 65537, or 786433 when N reaches it)");
  bench->add_option("--out", bo.out, "CSV path, - for stdout")->capture_default_str();
  bench->add_option("--seed", bo.seed, "RNG seed (default: HCPDQ_SEED or random)");
  bench->add_flag("--deterministic", bo.deterministic, "write 0 for wall-clock columns");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*keygen) cmd_keygen(kg);
    if (*compress) cmd_compress(co);
    if (*decompress) cmd_decompress(de);
    if (*serve) cmd_serve(sv);
    if (*query) cmd_query(qo);
    if (*bench) return cmd_bench(bo);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
