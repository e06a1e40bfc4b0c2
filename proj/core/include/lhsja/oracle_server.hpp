#ifndef LHSJA_ORACLE_SERVER_HPP
#define LHSJA_ORACLE_SERVER_HPP

// Reference server for the oracle wire protocol, serving any in-process
// OracleSet. Used by tests, the acceptance suite and `lhsja serve-suite`.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "lhsja/oracles.hpp"
#include "lhsja/wire.hpp"

namespace lhsja::remote {

struct ServerOptions {
  /// Advertise concurrency and evaluate requests on a per-connection pool.
  bool concurrent = false;
  std::size_t workers = 4;
  bool deterministic = true;
  std::size_t max_frame = wire::kDefaultMaxFrame;

  // Fault injection, for exercising client error paths.
  /// Swallow the first response for every id divisible by this (0 = never).
  std::uint64_t drop_first_response_every = 0;
  /// Added to every response id except the info handshake.
  std::uint64_t id_skew = 0;
  /// Per-request delay in concurrent mode, scaled by (id % 4), so pipelined
  /// responses come back out of order.
  std::chrono::microseconds jitter{0};
};

class OracleServer {
 public:
  explicit OracleServer(OracleSet oracles, ServerOptions options = {});
  ~OracleServer();
  OracleServer(const OracleServer&) = delete;
  OracleServer& operator=(const OracleServer&) = delete;

  /// Binds and starts accepting. Port 0 picks an ephemeral port.
  void start(const std::string& host = "127.0.0.1", std::uint16_t port = 0);
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  std::uint16_t port() const noexcept { return port_; }
  std::string address() const;

  wire::Info info() const;
  /// Evaluates one request without any transport. Never throws; failures
  /// become ok=false responses.
  wire::Response evaluate(const wire::Request& request) const;

  /// Oracle evaluations performed, excluding info and deduplicated resends.
  std::uint64_t evaluations() const noexcept { return evaluations_.load(); }
  std::uint64_t classify_evaluations() const noexcept { return classify_evaluations_.load(); }
  /// Requests answered from the per-session cache.
  std::uint64_t duplicates() const noexcept { return duplicates_.load(); }
  std::uint64_t dropped() const noexcept { return dropped_.load(); }

 private:
  struct Session;
  void accept_loop();
  void serve(Session& session);

  OracleSet oracles_;
  ServerOptions options_;
  std::string host_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::thread acceptor_;

  std::mutex mu_;
  std::condition_variable stopped_cv_;
  bool running_ = false;
  std::list<std::unique_ptr<Session>> sessions_;

  mutable std::atomic<std::uint64_t> evaluations_{0};
  mutable std::atomic<std::uint64_t> classify_evaluations_{0};
  std::atomic<std::uint64_t> duplicates_{0};
  std::atomic<std::uint64_t> dropped_{0};
};

}  // namespace lhsja::remote

#endif  // LHSJA_ORACLE_SERVER_HPP
