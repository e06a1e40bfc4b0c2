#include "lhsja/remote.hpp"

#include <atomic>
#include <condition_variable>
#include <exception>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "lhsja/errors.hpp"
#include "socket.hpp"

namespace lhsja::remote {

struct Connection::State {
  detail::Fd fd;
  std::thread reader;

  std::mutex write_mu;
  std::mutex mu;
  std::condition_variable slot_cv;
  std::size_t in_flight = 0;
  std::size_t max_in_flight = 1;
  std::map<std::uint64_t, std::promise<wire::Response>> pending;
  // Ids that were resent or abandoned; late duplicates for them are dropped.
  std::set<std::uint64_t> retried;
  std::exception_ptr broken;

  std::atomic<std::uint64_t> next_id{1};
  std::atomic<std::uint64_t> resends{0};

  void fail_all(std::exception_ptr e) {
    std::lock_guard lock(mu);
    if (!broken) broken = e;
    for (auto& [id, p] : pending) p.set_exception(broken);
    pending.clear();
    slot_cv.notify_all();
  }

  void read_loop(std::size_t max_frame) {
    detail::LineReader lines(fd.get(), max_frame);
    try {
      for (;;) {
        auto line = lines.next();
        if (!line) {
          fail_all(std::make_exception_ptr(OracleUnreachable("oracle server closed the connection")));
          return;
        }
        wire::Response r = wire::decode_response(*line, max_frame);
        std::lock_guard lock(mu);
        auto it = pending.find(r.id);
        if (it != pending.end()) {
          it->second.set_value(std::move(r));
          pending.erase(it);
          continue;
        }
        if (retried.count(r.id) != 0) continue;
        throw ProtocolError("response id " + std::to_string(r.id) + " matches no outstanding request", 0);
      }
    } catch (...) {
      fail_all(std::current_exception());
      fd.shutdown();
    }
  }
};

Connection::Connection(std::string address, ClientOptions options)
    : address_(std::move(address)), options_(options), state_(std::make_unique<State>()) {}

std::shared_ptr<Connection> Connection::open(const std::string& address, ClientOptions options) {
  if (options.max_in_flight == 0) throw ContractViolation("max_in_flight must be positive");
  if (options.max_retries < 0) throw ContractViolation("max_retries must be non-negative");
  std::shared_ptr<Connection> c(new Connection(address, options));
  c->state_->fd = detail::connect_tcp(detail::parse_address(address));
  State* s = c->state_.get();
  s->reader = std::thread([s, max = options.max_frame] { s->read_loop(max); });

  const wire::Response hello = c->call(wire::Op::kInfo, {});
  if (!hello.info) throw ProtocolError("info response carries no capability fields", 0);
  c->info_ = *hello.info;
  s->max_in_flight = c->info_.concurrent ? options.max_in_flight : 1;
  return c;
}

Connection::~Connection() {
  state_->fd.shutdown();
  if (state_->reader.joinable()) state_->reader.join();
}

std::uint64_t Connection::requests() const noexcept { return state_->next_id.load() - 1; }
std::uint64_t Connection::resends() const noexcept { return state_->resends.load(); }

wire::Response Connection::call(wire::Op op, std::span<const float> payload) {
  State& s = *state_;
  std::future<wire::Response> future;
  std::uint64_t id = 0;
  {
    std::unique_lock lock(s.mu);
    s.slot_cv.wait(lock, [&] { return s.broken || s.in_flight < s.max_in_flight; });
    if (s.broken) std::rethrow_exception(s.broken);
    ++s.in_flight;
    id = s.next_id.fetch_add(1);
    future = s.pending[id].get_future();
  }
  struct SlotGuard {
    State& s;
    ~SlotGuard() {
      std::lock_guard lock(s.mu);
      --s.in_flight;
      s.slot_cv.notify_one();
    }
  } guard{s};

  const std::string frame =
      wire::encode_request(wire::Request{op, id, std::vector<float>(payload.begin(), payload.end())});
  for (int attempt = 0;; ++attempt) {
    {
      std::lock_guard lock(s.write_mu);
      try {
        detail::write_all(s.fd.get(), frame);
      } catch (...) {
        s.fail_all(std::current_exception());
      }
    }
    if (future.wait_for(options_.timeout) == std::future_status::ready) break;
    std::lock_guard lock(s.mu);
    s.retried.insert(id);
    if (attempt >= options_.max_retries) {
      // The reader may have fulfilled the promise after the wait expired.
      if (s.pending.erase(id) == 0) break;
      throw OracleUnreachable("no response to request " + std::to_string(id) + " from " + address_ + " after " +
                              std::to_string(attempt + 1) + " attempts");
    }
    s.resends.fetch_add(1);
  }

  wire::Response r = future.get();
  if (!r.ok) {
    throw ContractViolation("remote " + wire::to_string(op) + " failed: " + r.error.value_or("unspecified error"));
  }
  return r;
}

namespace {

std::vector<float> to_payload(const Vector& v, std::size_t expected, const char* what) {
  if (v.dim() != expected) {
    throw ContractViolation(std::string(what) + " expects dim " + std::to_string(expected) + ", got " +
                            std::to_string(v.dim()));
  }
  return to_floats(v);
}

Vector from_payload(const wire::Response& r, std::size_t expected, const char* what) {
  if (!r.payload) throw ProtocolError(std::string(what) + " response carries no payload", 0);
  if (r.payload->size() != expected) {
    throw ProtocolError(std::string(what) + " response has " + std::to_string(r.payload->size()) +
                            " values, expected " + std::to_string(expected),
                        0);
  }
  return Vector::from_floats(*r.payload);
}

class RemoteClassifier final : public ClassifierOracle {
 public:
  explicit RemoteClassifier(std::shared_ptr<Connection> c) : c_(std::move(c)) {}

  Classification classify(const Vector& image) const override {
    const auto payload = to_payload(image, input_dim(), "remote classify");
    const wire::Response r = c_->call(wire::Op::kClassify, payload);
    if (!r.label) throw ProtocolError("classify response carries no label", 0);
    Classification out{Label{*r.label}, std::nullopt};
    if (r.confidence) out.confidence = static_cast<double>(*r.confidence);
    return out;
  }
  std::size_t num_classes() const override { return c_->info().num_classes; }
  std::size_t input_dim() const override { return c_->info().input_dim; }
  bool concurrent() const override { return c_->info().concurrent; }
  std::string id() const override { return "remote:" + c_->address() + "/classifier"; }

 private:
  std::shared_ptr<Connection> c_;
};

class RemoteGenerator final : public GeneratorOracle {
 public:
  explicit RemoteGenerator(std::shared_ptr<Connection> c) : c_(std::move(c)) {}

  Vector generate(const Vector& latent) const override {
    const auto payload = to_payload(latent, latent_dim(), "remote generate");
    return from_payload(c_->call(wire::Op::kGenerate, payload), image_dim(), "generate");
  }
  std::size_t latent_dim() const override { return c_->info().latent_dim; }
  std::size_t image_dim() const override { return c_->info().image_dim; }
  BoundsBox latent_bounds() const override { return c_->info().latent_bounds; }
  bool concurrent() const override { return c_->info().concurrent; }
  std::string id() const override { return "remote:" + c_->address() + "/generator"; }

 private:
  std::shared_ptr<Connection> c_;
};

class RemoteEncoder final : public EncoderOracle {
 public:
  explicit RemoteEncoder(std::shared_ptr<Connection> c) : c_(std::move(c)) {}

  Vector encode(const Vector& image) const override {
    const auto payload = to_payload(image, image_dim(), "remote encode");
    return from_payload(c_->call(wire::Op::kEncode, payload), latent_dim(), "encode");
  }
  std::size_t image_dim() const override { return c_->info().image_dim; }
  std::size_t latent_dim() const override { return c_->info().latent_dim; }
  std::string id() const override { return "remote:" + c_->address() + "/encoder"; }

 private:
  std::shared_ptr<Connection> c_;
};

class RemoteEmbedder final : public EmbeddingOracle {
 public:
  explicit RemoteEmbedder(std::shared_ptr<Connection> c) : c_(std::move(c)) {}

  Vector embed(const Vector& image) const override {
    const auto payload = to_payload(image, c_->info().input_dim, "remote embed");
    return from_payload(c_->call(wire::Op::kEmbed, payload), embed_dim(), "embed");
  }
  std::size_t embed_dim() const override { return c_->info().embed_dim; }
  std::string name() const override { return "remote:" + c_->address() + "/embed"; }

 private:
  std::shared_ptr<Connection> c_;
};

}  // namespace

RemoteOracleSet::RemoteOracleSet(std::shared_ptr<Connection> connection) : connection_(std::move(connection)) {
  if (!connection_) throw ContractViolation("RemoteOracleSet needs a connection");
}

void RemoteOracleSet::require_deterministic() const {
  if (!info().deterministic && !connection_->options().allow_nondeterministic) {
    throw ContractViolation("oracle server at " + connection_->address() +
                            " is not deterministic; refusing attack use without the override");
  }
}

std::shared_ptr<const ClassifierOracle> RemoteOracleSet::classifier() const {
  require_deterministic();
  return probe_classifier();
}

std::shared_ptr<const ClassifierOracle> RemoteOracleSet::probe_classifier() const {
  if (info().num_classes == 0 || info().input_dim == 0) return nullptr;
  return std::make_shared<RemoteClassifier>(connection_);
}

std::shared_ptr<const GeneratorOracle> RemoteOracleSet::generator() const {
  require_deterministic();
  if (info().latent_dim == 0 || info().image_dim == 0) return nullptr;
  return std::make_shared<RemoteGenerator>(connection_);
}

std::shared_ptr<const EncoderOracle> RemoteOracleSet::encoder() const {
  require_deterministic();
  if (info().latent_dim == 0 || info().image_dim == 0) return nullptr;
  return std::make_shared<RemoteEncoder>(connection_);
}

std::shared_ptr<const EmbeddingOracle> RemoteOracleSet::embedder() const {
  require_deterministic();
  if (info().embed_dim == 0 || info().input_dim == 0) return nullptr;
  return std::make_shared<RemoteEmbedder>(connection_);
}

OracleSet RemoteOracleSet::oracles() const {
  return OracleSet{classifier(), generator(), encoder(), embedder()};
}

RemoteOracleSet connect(const std::string& address, ClientOptions options) {
  return RemoteOracleSet(Connection::open(address, options));
}

DeterminismReport probe_determinism(const ClassifierOracle& classifier, const Vector& payload,
                                    std::size_t calls) {
  if (calls == 0) throw ContractViolation("determinism probe needs at least one call");
  std::set<std::uint32_t> labels;
  for (std::size_t i = 0; i < calls; ++i) labels.insert(classifier.classify(payload).label.id);
  return DeterminismReport{calls, labels.size(), labels.size() == 1};
}

}  // namespace lhsja::remote
