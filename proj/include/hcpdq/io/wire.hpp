#pragma once

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "hcpdq/error.hpp"
#include "hcpdq/io/bytes.hpp"

namespace hcpdq::io {

enum class MsgType : std::uint8_t { kHello = 0x01, kQuery = 0x02, kAnswer = 0x03, kError = 0x04 };

inline bool known_msg_type(std::uint8_t t) { return t >= 0x01 && t <= 0x04; }

// Key material for n = 2^13 with a deep chain runs to a few hundred MB; the
// cap only guards against garbage length fields.
inline constexpr std::uint32_t kMaxFramePayload = std::uint32_t{1} << 30;
inline constexpr std::size_t kFrameHeader = 5;

struct Frame {
  MsgType type = MsgType::kError;
  std::vector<std::uint8_t> payload;
  friend bool operator==(const Frame&, const Frame&) = default;
};

// type byte, 4-byte big-endian payload length, payload.
inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  if (f.payload.size() > kMaxFramePayload) throw Error(Errc::kProtocol, "frame payload too large");
  std::vector<std::uint8_t> out(kFrameHeader + f.payload.size());
  out[0] = static_cast<std::uint8_t>(f.type);
  const auto len = static_cast<std::uint32_t>(f.payload.size());
  out[1] = static_cast<std::uint8_t>(len >> 24);
  out[2] = static_cast<std::uint8_t>(len >> 16);
  out[3] = static_cast<std::uint8_t>(len >> 8);
  out[4] = static_cast<std::uint8_t>(len);
  std::copy(f.payload.begin(), f.payload.end(), out.begin() + kFrameHeader);
  return out;
}

inline std::uint32_t frame_length(std::span<const std::uint8_t> header) {
  return (std::uint32_t{header[1]} << 24) | (std::uint32_t{header[2]} << 16) | (std::uint32_t{header[3]} << 8) |
         std::uint32_t{header[4]};
}

// Exactly one frame, nothing after it.
inline Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeader) throw Error(Errc::kProtocol, "short frame header");
  if (!known_msg_type(bytes[0])) throw Error(Errc::kProtocol, "unknown message type " + std::to_string(bytes[0]));
  const auto len = frame_length(bytes);
  if (len > kMaxFramePayload) throw Error(Errc::kProtocol, "frame payload too large");
  if (bytes.size() - kFrameHeader != len) throw Error(Errc::kProtocol, "frame length does not match its payload");
  return {static_cast<MsgType>(bytes[0]), {bytes.begin() + kFrameHeader, bytes.end()}};
}

// ERROR payload: code byte, then a UTF-8 message.
inline Frame error_frame(Errc code, const std::string& message) {
  Frame f{MsgType::kError, {}};
  f.payload.push_back(static_cast<std::uint8_t>(code));
  f.payload.insert(f.payload.end(), message.begin(), message.end());
  return f;
}

inline Error error_from_frame(const Frame& f) {
  if (f.payload.empty()) return Error(Errc::kProtocol, "empty ERROR frame");
  const auto code = f.payload[0];
  const std::string msg(f.payload.begin() + 1, f.payload.end());
  if (code > static_cast<std::uint8_t>(Errc::kProtocol)) return Error(Errc::kProtocol, "peer: " + msg);
  return Error(static_cast<Errc>(code), "peer: " + msg);
}

// Appends every frame sent or received, prefixed by 'S' (sent) or 'R'
// (received), for replay in regression tests.
class Recorder {
 public:
  explicit Recorder(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(Errc::kIo, "cannot open record file " + path);
  }
  void log(char direction, std::span<const std::uint8_t> frame) {
    std::lock_guard lock(mu_);
    out_.put(direction);
    out_.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

// Owned file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  void shutdown_write() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
  }

 private:
  int fd_ = -1;
};

inline void write_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t k = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::kIo, std::string("send: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(k);
  }
}

// Bytes read before EOF; fewer than `len` only at end of stream.
inline std::size_t read_full(int fd, std::uint8_t* buf, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    const ssize_t k = ::recv(fd, buf + off, len - off, 0);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::kIo, std::string("recv: ") + std::strerror(errno));
    }
    if (k == 0) break;
    off += static_cast<std::size_t>(k);
  }
  return off;
}

// Framed stream over a connected socket.
class Channel {
 public:
  explicit Channel(Socket sock, Recorder* rec = nullptr) : sock_(std::move(sock)), rec_(rec) {}

  void send(const Frame& f) {
    const auto bytes = encode_frame(f);
    if (rec_) rec_->log('S', bytes);
    write_all(sock_.fd(), bytes);
  }

  // nullopt on a clean end of stream between frames. Malformed input throws
  // Protocol.
  std::optional<Frame> receive() {
    std::uint8_t header[kFrameHeader];
    const std::size_t got = read_full(sock_.fd(), header, kFrameHeader);
    if (got == 0) return std::nullopt;
    if (got < kFrameHeader) throw Error(Errc::kProtocol, "stream ended inside a frame header");
    if (!known_msg_type(header[0])) throw Error(Errc::kProtocol, "unknown message type " + std::to_string(header[0]));
    const auto len = frame_length(header);
    if (len > kMaxFramePayload) throw Error(Errc::kProtocol, "frame payload too large");
    Frame f{static_cast<MsgType>(header[0]), std::vector<std::uint8_t>(len)};
    if (read_full(sock_.fd(), f.payload.data(), len) != len) {
      throw Error(Errc::kProtocol, "frame length does not match its payload");
    }
    if (rec_) rec_->log('R', encode_frame(f));
    return f;
  }

  // Next frame, which must be of the given type; ERROR frames are rethrown.
  Frame expect(MsgType type) {
    auto f = receive();
    if (!f) throw Error(Errc::kProtocol, "connection closed by peer");
    if (f->type == MsgType::kError) throw error_from_frame(*f);
    if (f->type != type) throw Error(Errc::kProtocol, "unexpected message type " + std::to_string(int(f->type)));
    return std::move(*f);
  }

  Socket& socket() noexcept { return sock_; }

 private:
  Socket sock_;
  Recorder* rec_;
};

// Listening socket on the loopback-or-any address; port 0 picks a free port.
inline Socket listen_tcp(std::uint16_t port, bool loopback_only = false) {
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw Error(Errc::kIo, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(loopback_only ? INADDR_LOOPBACK : INADDR_ANY);
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw Error(Errc::kIo, "bind port " + std::to_string(port) + ": " + std::strerror(errno));
  }
  if (::listen(s.fd(), 16) != 0) throw Error(Errc::kIo, std::string("listen: ") + std::strerror(errno));
  return s;
}

inline std::uint16_t local_port(const Socket& s) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw Error(Errc::kIo, std::string("getsockname: ") + std::strerror(errno));
  }
  return ntohs(addr.sin_port);
}

// Waits up to timeout_ms for a connection; invalid socket on timeout.
inline Socket accept_tcp(const Socket& listener, int timeout_ms) {
  pollfd p{listener.fd(), POLLIN, 0};
  const int r = ::poll(&p, 1, timeout_ms);
  if (r < 0 && errno != EINTR) throw Error(Errc::kIo, std::string("poll: ") + std::strerror(errno));
  if (r <= 0) return Socket();
  Socket c(::accept(listener.fd(), nullptr, nullptr));
  if (!c.valid()) throw Error(Errc::kIo, std::string("accept: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(c.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return c;
}

inline Socket connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res); rc != 0) {
    throw Error(Errc::kIo, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  const int rc = s.valid() ? ::connect(s.fd(), res->ai_addr, res->ai_addrlen) : -1;
  const int err = errno;
  ::freeaddrinfo(res);
  if (rc != 0) throw Error(Errc::kIo, "connect " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

}  // namespace hcpdq::io
