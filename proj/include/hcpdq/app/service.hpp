#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "hcpdq/io/serialize.hpp"
#include "hcpdq/io/wire.hpp"
#include "hcpdq/pdq/protocol.hpp"

namespace hcpdq::app {

inline constexpr std::uint16_t kWireVersion = 1;

// Query randomness is drawn from its own stream so keygen and queries stay
// reproducible from one seed.
inline std::uint64_t query_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

// Handshake, all HELLO frames:
//   client -> server  u16 version, backend byte
//   server -> client  u16 version, backend byte, u64 N, u32 s, HE parameters
//   client -> server  public key set (HCV1 envelope)
//   server -> client  u64 key id echo
// then any number of QUERY -> ANSWER | ERROR exchanges.

struct ServerHello {
  homcomp::CompressionParams params;
  he::BackendId backend = he::BackendId::kSimulator;
};

inline std::vector<std::uint8_t> encode_server_hello(const ServerHello& h) {
  io::Writer w;
  w.u16(kWireVersion);
  w.u8(static_cast<std::uint8_t>(h.backend));
  w.u64(h.params.N);
  w.u32(static_cast<std::uint32_t>(h.params.s));
  io::put_params(w, h.params.he);
  return w.take();
}

inline ServerHello decode_server_hello(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes);
  if (const auto v = r.u16(); v != kWireVersion) throw Error(Errc::kProtocol, "server speaks version " + std::to_string(v));
  ServerHello h;
  h.backend = static_cast<he::BackendId>(r.u8());
  h.params.N = r.u64();
  h.params.s = r.u32();
  h.params.he = io::get_params(r);
  r.expect_end();
  h.params.validate();
  return h;
}

template <he::HeBackend B>
class PdqServer {
 public:
  PdqServer(pdq::Database db, homcomp::CompressionParams params, io::Recorder* rec = nullptr)
      : db_(std::move(db)), params_(params), plan_(pdq::make_plan(params_)), rec_(rec) {
    db_.validate(params_.he.p);
    pdq::detail::check_db(db_, params_);
  }

  const homcomp::CompressionParams& params() const noexcept { return params_; }

  // Accepts until stop(); one thread per connection over shared read-only
  // state. `max_sessions` > 0 stops accepting after that many and returns once they end.
  void serve(const io::Socket& listener, std::size_t max_sessions = 0) {
    std::vector<std::thread> workers;
    std::size_t started = 0;
    while (!stop_.load()) {
      if (max_sessions && started == max_sessions) break;
      io::Socket conn = io::accept_tcp(listener, 100);
      if (!conn.valid()) continue;
      ++started;
      workers.emplace_back([this, c = std::move(conn)]() mutable { session(std::move(c)); });
    }
    for (auto& t : workers) t.join();
  }

  void stop() { stop_.store(true); }

  // One connection: handshake, then queries until the client hangs up.
  // Protocol violations get an ERROR frame and end the session.
  void session(io::Socket conn) {
    io::Channel ch(std::move(conn), rec_);
    try {
      const auto keys = handshake(ch);
      while (auto f = ch.receive()) {
        if (f->type != io::MsgType::kQuery) {
          ch.send(io::error_frame(Errc::kProtocol, "expected QUERY"));
          return;
        }
        try {
          const auto q = io::parse_query<B>(f->payload);
          he::Evaluator<B> ev(keys);
          const auto ans = pdq::answer<B>(ev, plan_, q, db_);
          ch.send({io::MsgType::kAnswer, io::serialize_answer<B>(ans)});
        } catch (const Error& e) {
          // A bad query leaves the session usable.
          ch.send(io::error_frame(e.code(), e.what()));
        }
      }
    } catch (const Error& e) {
      try {
        ch.send(io::error_frame(e.code(), e.what()));
      } catch (const Error&) {
      }
    }
  }

 private:
  typename B::KeySet handshake(io::Channel& ch) {
    const auto hello = ch.expect(io::MsgType::kHello);
    io::Reader r(hello.payload);
    const auto version = r.u16();
    const auto backend = r.u8();
    r.expect_end();
    if (version != kWireVersion) throw Error(Errc::kProtocol, "unsupported wire version " + std::to_string(version));
    if (backend != static_cast<std::uint8_t>(B::kId)) {
      throw Error(Errc::kBackendMismatch, std::string("server runs backend ") + he::backend_name(B::kId));
    }
    ch.send({io::MsgType::kHello, encode_server_hello({params_, B::kId})});

    auto keys = io::parse_keys<B>(ch.expect(io::MsgType::kHello).payload);
    if (keys.params() != params_.he) throw Error(Errc::kInvalidParams, "keys were made for other parameters");
    if (keys.has_secret()) throw Error(Errc::kProtocol, "refusing key material that contains the secret key");
    if (!keys.has_public()) throw Error(Errc::kProtocol, "key set carries no public key");
    const auto need = homcomp::required_rotations(params_);
    for (auto a : need.row_amounts) {
      if (!keys.rotations().has_row(a)) throw Error(Errc::kMissingRotationKey, "rotation " + std::to_string(a));
    }
    if (need.column && !keys.rotations().column) throw Error(Errc::kMissingRotationKey, "row swap");
    io::Writer w;
    w.u64(keys_id(keys));
    ch.send({io::MsgType::kHello, w.take()});
    return keys;
  }

  static std::uint64_t keys_id(const typename B::KeySet& k) {
    if constexpr (requires { k.key_id(); }) {
      return k.key_id();
    } else {
      return k.key_id;
    }
  }

  pdq::Database db_;
  homcomp::CompressionParams params_;
  homcomp::BsgsPlan plan_;
  io::Recorder* rec_;
  std::atomic<bool> stop_{false};
};

struct QueryOutcome {
  pdq::PdqResult result;
  std::vector<std::uint8_t> answer_bytes;
};

template <he::HeBackend B>
class PdqClient {
 public:
  static PdqClient connect(const std::string& host, std::uint16_t port, std::uint64_t seed,
                           io::Recorder* rec = nullptr) {
    PdqClient c(io::Channel(io::connect_tcp(host, port), rec), seed);
    c.handshake(seed);
    return c;
  }

  const homcomp::CompressionParams& params() const { return state_.params; }
  pdq::ClientState<B>& state() { return state_; }

  QueryOutcome query(u64 x) {
    const auto q = pdq::query<B>(x, state_, rng_);
    ch_.send({io::MsgType::kQuery, io::serialize_query<B>(q)});
    auto frame = ch_.expect(io::MsgType::kAnswer);
    const auto ans = io::parse_answer<B>(frame.payload);
    return {pdq::recover<B>(ans, state_), std::move(frame.payload)};
  }

  void close() { ch_.socket().close(); }

 private:
  PdqClient(io::Channel ch, std::uint64_t seed) : ch_(std::move(ch)), rng_(query_seed(seed)) {}

  void handshake(std::uint64_t seed) {
    io::Writer w;
    w.u16(kWireVersion);
    w.u8(static_cast<std::uint8_t>(B::kId));
    ch_.send({io::MsgType::kHello, w.take()});
    const auto hello = decode_server_hello(ch_.expect(io::MsgType::kHello).payload);
    if (hello.backend != B::kId) throw Error(Errc::kBackendMismatch, "server answered for another backend");
    state_ = pdq::make_client<B>(hello.params, seed);
    ch_.send({io::MsgType::kHello, io::serialize_keys<B>(state_.keys.public_part())});
    ch_.expect(io::MsgType::kHello);
  }

  io::Channel ch_;
  std::mt19937_64 rng_;
  pdq::ClientState<B> state_;
};

// The same protocol run without sockets, drawing keys and query randomness
// exactly as PdqClient does.
template <he::HeBackend B>
class InProcessPdq {
 public:
  InProcessPdq(pdq::Database db, homcomp::CompressionParams params, std::uint64_t seed)
      : db_(std::move(db)),
        state_(pdq::make_client<B>(params, seed)),
        server_keys_(state_.keys.public_part()),
        plan_(pdq::make_plan(params)),
        rng_(query_seed(seed)) {
    db_.validate(params.he.p);
  }

  QueryOutcome query(u64 x) {
    const auto q = pdq::query<B>(x, state_, rng_);
    he::Evaluator<B> ev(server_keys_);
    const auto ans = pdq::answer<B>(ev, plan_, q, db_);
    return {pdq::recover<B>(ans, state_), io::serialize_answer<B>(ans)};
  }

 private:
  pdq::Database db_;
  pdq::ClientState<B> state_;
  typename B::KeySet server_keys_;
  homcomp::BsgsPlan plan_;
  std::mt19937_64 rng_;
};

}  // namespace hcpdq::app
