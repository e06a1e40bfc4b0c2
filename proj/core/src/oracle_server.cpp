#include "lhsja/oracle_server.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <deque>
#include <unordered_map>
#include <vector>

#include "lhsja/errors.hpp"
#include "socket.hpp"

namespace lhsja::remote {

struct OracleServer::Session {
  struct Entry {
    bool done = false;
    std::string frame;
  };

  detail::Fd fd;
  std::thread thread;
  std::atomic<bool> finished{false};

  std::mutex mu;
  std::mutex write_mu;
  std::unordered_map<std::uint64_t, Entry> seen;

  std::condition_variable queue_cv;
  std::deque<wire::Request> queue;
  bool closing = false;
  std::vector<std::thread> workers;

  void send(std::string_view frame) {
    std::lock_guard lock(write_mu);
    try {
      detail::write_all(fd.get(), frame);
    } catch (const OracleUnreachable&) {
      // Client went away; the read loop notices on its own.
    }
  }
};

OracleServer::OracleServer(OracleSet oracles, ServerOptions options)
    : oracles_(std::move(oracles)), options_(options) {
  if (!oracles_.classifier) throw ContractViolation("OracleServer needs a classifier");
  if (options_.concurrent && options_.workers == 0) throw ContractViolation("concurrent server needs workers");
}

OracleServer::~OracleServer() { stop(); }

void OracleServer::start(const std::string& host, std::uint16_t port) {
  std::lock_guard lock(mu_);
  if (running_) throw ContractViolation("server already started");
  detail::Fd fd = detail::listen_tcp(host, port, port_);
  listen_fd_ = fd.release();
  host_ = host;
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void OracleServer::stop() {
  {
    std::lock_guard lock(mu_);
    if (!running_) return;
    running_ = false;
    ::shutdown(listen_fd_, SHUT_RDWR);
  }
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::list<std::unique_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
  }
  for (auto& s : sessions) {
    s->fd.shutdown();
    if (s->thread.joinable()) s->thread.join();
  }
  stopped_cv_.notify_all();
}

void OracleServer::wait() {
  std::unique_lock lock(mu_);
  stopped_cv_.wait(lock, [this] { return !running_; });
}

std::string OracleServer::address() const {
  const bool v6 = host_.find(':') != std::string::npos;
  return (v6 ? "[" + host_ + "]" : host_) + ":" + std::to_string(port_);
}

void OracleServer::accept_loop() {
  for (;;) {
    const int client = ::accept(listen_fd_, nullptr, nullptr);
    std::lock_guard lock(mu_);
    if (!running_) {
      if (client >= 0) ::close(client);
      return;
    }
    if (client < 0) continue;
    sessions_.remove_if([](const std::unique_ptr<Session>& s) {
      if (!s->finished.load()) return false;
      s->thread.join();
      return true;
    });
    auto session = std::make_unique<Session>();
    session->fd = detail::Fd(client);
    Session* raw = session.get();
    session->thread = std::thread([this, raw] {
      serve(*raw);
      raw->finished.store(true);
    });
    sessions_.push_back(std::move(session));
  }
}

void OracleServer::serve(Session& s) {
  auto process = [this, &s](const wire::Request& req) {
    if (options_.jitter.count() > 0) std::this_thread::sleep_for(options_.jitter * static_cast<int>(req.id % 4));
    wire::Response r = evaluate(req);
    if (req.op != wire::Op::kInfo) r.id += options_.id_skew;
    std::string frame = wire::encode_response(r);
    {
      std::lock_guard lock(s.mu);
      s.seen[req.id] = Session::Entry{true, frame};
    }
    if (options_.drop_first_response_every != 0 && req.id % options_.drop_first_response_every == 0) {
      dropped_.fetch_add(1);
      return;
    }
    s.send(frame);
  };

  if (options_.concurrent) {
    for (std::size_t i = 0; i < options_.workers; ++i) {
      s.workers.emplace_back([&s, &process] {
        for (;;) {
          wire::Request req;
          {
            std::unique_lock lock(s.mu);
            s.queue_cv.wait(lock, [&] { return s.closing || !s.queue.empty(); });
            if (s.queue.empty()) return;
            req = std::move(s.queue.front());
            s.queue.pop_front();
          }
          process(req);
        }
      });
    }
  }

  detail::LineReader lines(s.fd.get(), options_.max_frame);
  try {
    while (auto line = lines.next()) {
      wire::Request req;
      try {
        req = wire::decode_request(*line, options_.max_frame);
      } catch (const ProtocolError& e) {
        s.send(wire::encode_response(wire::error_response(0, e.what())));
        continue;
      }
      std::string cached;
      {
        std::lock_guard lock(s.mu);
        auto it = s.seen.find(req.id);
        if (it != s.seen.end()) {
          duplicates_.fetch_add(1);
          if (!it->second.done) continue;  // still being evaluated; that answer is on its way
          cached = it->second.frame;
        } else {
          s.seen.emplace(req.id, Session::Entry{});
        }
      }
      if (!cached.empty()) {
        s.send(cached);
        continue;
      }
      if (options_.concurrent) {
        std::lock_guard lock(s.mu);
        s.queue.push_back(std::move(req));
        s.queue_cv.notify_one();
      } else {
        process(req);
      }
    }
  } catch (const ProtocolError& e) {
    // Oversized frame: the stream cannot be resynchronized.
    s.send(wire::encode_response(wire::error_response(0, e.what())));
  }

  {
    std::lock_guard lock(s.mu);
    s.closing = true;
  }
  s.queue_cv.notify_all();
  for (auto& w : s.workers) w.join();
  s.fd.shutdown();
}

wire::Info OracleServer::info() const {
  wire::Info i;
  i.num_classes = static_cast<std::uint32_t>(oracles_.classifier->num_classes());
  i.input_dim = static_cast<std::uint32_t>(oracles_.classifier->input_dim());
  if (oracles_.generator) {
    i.latent_dim = static_cast<std::uint32_t>(oracles_.generator->latent_dim());
    i.image_dim = static_cast<std::uint32_t>(oracles_.generator->image_dim());
    i.latent_bounds = oracles_.generator->latent_bounds();
  } else if (oracles_.encoder) {
    i.latent_dim = static_cast<std::uint32_t>(oracles_.encoder->latent_dim());
    i.image_dim = static_cast<std::uint32_t>(oracles_.encoder->image_dim());
  }
  if (oracles_.embedder) i.embed_dim = static_cast<std::uint32_t>(oracles_.embedder->embed_dim());
  i.concurrent = options_.concurrent;
  i.deterministic = options_.deterministic;
  return i;
}

wire::Response OracleServer::evaluate(const wire::Request& req) const {
  auto check_dim = [&](std::size_t expected) -> std::optional<wire::Response> {
    if (req.payload.size() == expected) return std::nullopt;
    return wire::error_response(req.id, wire::to_string(req.op) + " expects dim " + std::to_string(expected) +
                                            ", got " + std::to_string(req.payload.size()));
  };
  auto missing = [&] { return wire::error_response(req.id, wire::to_string(req.op) + " is not served here"); };

  wire::Response r;
  r.id = req.id;
  r.ok = true;
  try {
    switch (req.op) {
      case wire::Op::kInfo:
        r.info = info();
        return r;
      case wire::Op::kClassify: {
        if (auto bad = check_dim(oracles_.classifier->input_dim())) return *bad;
        evaluations_.fetch_add(1);
        classify_evaluations_.fetch_add(1);
        const Classification c = oracles_.classifier->classify(Vector::from_floats(req.payload));
        r.label = c.label.id;
        if (c.confidence) r.confidence = static_cast<float>(*c.confidence);
        return r;
      }
      case wire::Op::kGenerate: {
        if (!oracles_.generator) return missing();
        if (auto bad = check_dim(oracles_.generator->latent_dim())) return *bad;
        evaluations_.fetch_add(1);
        r.payload = to_floats(oracles_.generator->generate(Vector::from_floats(req.payload)));
        return r;
      }
      case wire::Op::kEncode: {
        if (!oracles_.encoder) return missing();
        if (auto bad = check_dim(oracles_.encoder->image_dim())) return *bad;
        evaluations_.fetch_add(1);
        r.payload = to_floats(oracles_.encoder->encode(Vector::from_floats(req.payload)));
        return r;
      }
      case wire::Op::kEmbed: {
        if (!oracles_.embedder) return missing();
        if (auto bad = check_dim(oracles_.classifier->input_dim())) return *bad;
        evaluations_.fetch_add(1);
        r.payload = to_floats(oracles_.embedder->embed(Vector::from_floats(req.payload)));
        return r;
      }
    }
  } catch (const std::exception& e) {
    return wire::error_response(req.id, e.what());
  }
  return missing();
}

}  // namespace lhsja::remote
