#ifndef LHSJA_SRC_SOCKET_HPP
#define LHSJA_SRC_SOCKET_HPP

// Thin POSIX TCP helpers shared by the remote client and the mock server.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lhsja::detail {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept;
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { close(); }

  int get() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  int release() noexcept;
  void close() noexcept;
  /// Unblocks any thread sitting in recv/accept on this descriptor.
  void shutdown() noexcept;

 private:
  int fd_ = -1;
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

/// Accepts "host:port" and "tcp://host:port".
HostPort parse_address(std::string_view address);

/// Throws OracleUnreachable when the connection cannot be made.
Fd connect_tcp(const HostPort& where);

/// Binds and listens; port 0 picks an ephemeral port, reported via `bound`.
Fd listen_tcp(const std::string& host, std::uint16_t port, std::uint16_t& bound);

/// Throws OracleUnreachable when the peer is gone.
void write_all(int fd, std::string_view data);

/// Splits a byte stream into '\n'-terminated frames.
class LineReader {
 public:
  LineReader(int fd, std::size_t max_frame) : fd_(fd), max_frame_(max_frame) {}

  /// Next frame without its newline, or nullopt at end of stream. A frame
  /// longer than max_frame raises ProtocolError.
  std::optional<std::string> next();

 private:
  int fd_;
  std::size_t max_frame_;
  std::string buffer_;
  std::size_t scanned_ = 0;
};

}  // namespace lhsja::detail

#endif  // LHSJA_SRC_SOCKET_HPP
