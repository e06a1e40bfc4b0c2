#ifndef LHSJA_REMOTE_HPP
#define LHSJA_REMOTE_HPP

// Client side of the oracle wire protocol.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "lhsja/oracles.hpp"
#include "lhsja/wire.hpp"

namespace lhsja::remote {

/// Environment variable consulted by the CLI when no address flag is given.
inline constexpr const char* kAddressEnv = "LHSJA_ORACLE_ADDR";

struct ClientOptions {
  /// How long to wait for a response before resending the same frame.
  std::chrono::milliseconds timeout{5000};
  /// Resends after the first attempt; the same id is reused every time.
  int max_retries = 2;
  std::size_t max_frame = wire::kDefaultMaxFrame;
  /// Pipeline depth when the server advertises concurrency; 1 otherwise.
  std::size_t max_in_flight = 32;
  /// Permit attack use of a server that reports deterministic=false.
  bool allow_nondeterministic = false;
};

/// One TCP session. Safe for concurrent callers: frames are serialized onto
/// the stream and responses are matched back to callers by id.
class Connection {
 public:
  static std::shared_ptr<Connection> open(const std::string& address, ClientOptions options = {});
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  /// Sends one request and waits for its response. Throws ProtocolError on
  /// bad traffic, OracleUnreachable when the server stops answering, and
  /// ContractViolation when the server answers ok=false.
  wire::Response call(wire::Op op, std::span<const float> payload);

  const wire::Info& info() const noexcept { return info_; }
  const std::string& address() const noexcept { return address_; }
  const ClientOptions& options() const noexcept { return options_; }
  /// Distinct request ids issued so far (the info handshake included).
  std::uint64_t requests() const noexcept;
  /// Frames sent again after a timeout.
  std::uint64_t resends() const noexcept;

 private:
  struct State;
  Connection(std::string address, ClientOptions options);

  std::string address_;
  ClientOptions options_;
  wire::Info info_;
  std::unique_ptr<State> state_;
};

/// Oracle views over a connection. Views are cheap shareable handles.
class RemoteOracleSet {
 public:
  explicit RemoteOracleSet(std::shared_ptr<Connection> connection);

  const wire::Info& info() const noexcept { return connection_->info(); }
  const std::shared_ptr<Connection>& connection() const noexcept { return connection_; }

  /// Views for attack use. Null for ops the server does not offer. When the
  /// server is not deterministic these throw ContractViolation unless the
  /// client was opened with allow_nondeterministic.
  std::shared_ptr<const ClassifierOracle> classifier() const;
  std::shared_ptr<const GeneratorOracle> generator() const;
  std::shared_ptr<const EncoderOracle> encoder() const;
  std::shared_ptr<const EmbeddingOracle> embedder() const;
  OracleSet oracles() const;

  /// Classifier view that skips the determinism gate. Used by probes.
  std::shared_ptr<const ClassifierOracle> probe_classifier() const;

 private:
  void require_deterministic() const;

  std::shared_ptr<Connection> connection_;
};

/// Opens a connection and performs the info handshake.
RemoteOracleSet connect(const std::string& address, ClientOptions options = {});

struct DeterminismReport {
  std::size_t calls = 0;
  std::size_t distinct_labels = 0;
  bool consistent = false;
};

/// Classifies the same payload `calls` times and checks the labels agree.
DeterminismReport probe_determinism(const ClassifierOracle& classifier, const Vector& payload,
                                    std::size_t calls = 100);

}  // namespace lhsja::remote

#endif  // LHSJA_REMOTE_HPP
