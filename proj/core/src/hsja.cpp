#include "lhsja/hsja.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <thread>

#include "lhsja/errors.hpp"

namespace lhsja {

void AttackConfig::validate() const {
  if (!(theta_bin > 0.0)) throw ContractViolation("AttackConfig: theta_bin must be > 0");
  if (b0 < 1) throw ContractViolation("AttackConfig: b0 must be >= 1");
  if (!(delta_scale > 0.0)) throw ContractViolation("AttackConfig: delta_scale must be > 0");
  if (k_max < 0) throw ContractViolation("AttackConfig: k_max must be >= 0");
  if (!(bounds.low < bounds.high)) throw ContractViolation("AttackConfig: bounds must have low < high");
  if (convergence_tol < 0.0) throw ContractViolation("AttackConfig: convergence_tol must be >= 0");
}

std::string to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::kBudgetExhausted: return "budget_exhausted";
    case TerminalReason::kConverged: return "converged";
    case TerminalReason::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

TerminalReason terminal_reason_from_string(const std::string& s) {
  if (s == "budget_exhausted") return TerminalReason::kBudgetExhausted;
  if (s == "converged") return TerminalReason::kConverged;
  if (s == "max_iterations") return TerminalReason::kMaxIterations;
  throw ContractViolation("unknown terminal reason '" + s + "'");
}

BoundarySearchResult binary_search_boundary(const DecisionOracle& decision, const Vector& x_adv,
                                            const Vector& x_src, double theta, EndpointCheck check) {
  if (x_adv.dim() != x_src.dim()) throw ContractViolation("binary_search_boundary: dimension mismatch");
  if (!(theta > 0.0)) throw ContractViolation("binary_search_boundary: theta must be > 0");

  std::size_t queries = 0;
  if (check == EndpointCheck::kVerify) {
    queries += 2;
    if (!decision.query(x_adv)) throw InvalidEndpoints("binary_search_boundary: x_adv is not adversarial");
    if (decision.query(x_src)) throw InvalidEndpoints("binary_search_boundary: x_src is adversarial");
  }

  // Blend parameter: 0 is x_src (clean side), 1 is x_adv (adversarial side).
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo >= theta) {
    const double mid = 0.5 * (lo + hi);
    ++queries;
    if (decision.query(interpolate(x_src, x_adv, mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {interpolate(x_src, x_adv, hi), hi - lo, queries};
}

Vector estimate_gradient_direction(const DecisionOracle& decision, const Vector& x_b, double delta,
                                   std::size_t batch, RngStream& rng, const BoundsBox& bounds) {
  if (batch < 1) throw ContractViolation("estimate_gradient_direction: batch must be >= 1");
  if (!(delta > 0.0)) throw ContractViolation("estimate_gradient_direction: delta must be > 0");

  const std::size_t dim = x_b.dim();
  // Directions are drawn up front in probe order so the result does not
  // depend on how the probes are scheduled.
  std::vector<Vector> dirs;
  dirs.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) dirs.push_back(sample_unit_sphere(dim, rng));

  std::vector<signed char> phi(batch, 0);
  auto probe = [&](std::size_t b) {
    phi[b] = decision.query(clamp_to_bounds(axpy(x_b, delta, dirs[b]), bounds)) ? 1 : -1;
  };

  const std::size_t workers =
      decision.concurrent ? std::min<std::size_t>(batch, std::max(1u, std::thread::hardware_concurrency())) : 1;
  if (workers <= 1) {
    for (std::size_t b = 0; b < batch; ++b) probe(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> tasks;
    tasks.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&] {
        for (std::size_t b = next.fetch_add(1); b < batch; b = next.fetch_add(1)) probe(b);
      }));
    }
    for (auto& t : tasks) t.wait();
    for (auto& t : tasks) t.get();
  }

  long sum_phi = 0;
  for (signed char p : phi) sum_phi += p;
  const auto n = static_cast<long>(batch);
  if (sum_phi == n || sum_phi == -n) return scale(dirs[0], static_cast<double>(phi[0]));

  const double mean = static_cast<double>(sum_phi) / static_cast<double>(batch);
  std::vector<double> acc(dim, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double w = static_cast<double>(phi[b]) - mean;
    const auto u = dirs[b].values();
    for (std::size_t i = 0; i < dim; ++i) acc[i] += w * u[i];
  }
  for (double& x : acc) x /= static_cast<double>(batch);

  Vector v(std::move(acc));
  if (l2_norm(v) == 0.0) return scale(dirs[0], static_cast<double>(phi[0]));
  return normalized(v);
}

StepResult geometric_step_search(const DecisionOracle& decision, const Vector& x_b, const Vector& v,
                                 double initial_step, const BoundsBox& bounds, int k_max) {
  if (x_b.dim() != v.dim()) throw ContractViolation("geometric_step_search: dimension mismatch");
  if (std::abs(l2_norm(v) - 1.0) > 1e-6) throw ContractViolation("geometric_step_search: v must have unit norm");
  if (initial_step < 0.0) throw ContractViolation("geometric_step_search: initial_step must be >= 0");
  if (initial_step == 0.0) return {x_b, 0.0, 0, 0};

  double step = initial_step;
  for (int k = 0; k <= k_max; ++k) {
    Vector candidate = clamp_to_bounds(axpy(x_b, step, v), bounds);
    if (decision.query(candidate)) {
      return {std::move(candidate), step, k, static_cast<std::size_t>(k) + 1};
    }
    step *= 0.5;
  }
  throw StepSearchFailed("geometric_step_search: no adversarial step after " +
                         std::to_string(k_max + 1) + " candidates");
}

namespace {

enum class Phase { kVerify, kBinarySearch, kGradient, kStepSearch };

/// Budget and per-phase accounting wrapped around the caller's oracle.
class QueryMeter {
 public:
  QueryMeter(const DecisionOracle& inner, std::uint64_t budget) : inner_(inner), budget_(budget) {}

  void set_phase(Phase p) noexcept { phase_ = p; }
  std::uint64_t used() const noexcept { return used_.load(); }
  std::uint64_t remaining() const noexcept { return budget_ - used_.load(); }

  bool query(const Vector& x) {
    std::uint64_t u = used_.load();
    do {
      if (u >= budget_) throw BudgetExhausted(u, budget_);
    } while (!used_.compare_exchange_weak(u, u + 1));
    counter(phase_).fetch_add(1);
    try {
      return inner_.query(x);
    } catch (const BudgetExhausted&) {
      // Refused downstream (e.g. by a ledger), so never reached the victim.
      used_.fetch_sub(1);
      counter(phase_).fetch_sub(1);
      throw;
    }
  }

  PhaseQueries snapshot() const {
    return {verify_.load(), binary_.load(), gradient_.load(), step_.load()};
  }

  DecisionOracle as_oracle() {
    return {[this](const Vector& x) { return query(x); }, inner_.concurrent};
  }

 private:
  std::atomic<std::uint64_t>& counter(Phase p) {
    switch (p) {
      case Phase::kVerify: return verify_;
      case Phase::kBinarySearch: return binary_;
      case Phase::kGradient: return gradient_;
      case Phase::kStepSearch: return step_;
    }
    return verify_;
  }

  const DecisionOracle& inner_;
  std::uint64_t budget_;
  Phase phase_ = Phase::kVerify;
  std::atomic<std::uint64_t> used_{0};
  std::atomic<std::uint64_t> verify_{0};
  std::atomic<std::uint64_t> binary_{0};
  std::atomic<std::uint64_t> gradient_{0};
  std::atomic<std::uint64_t> step_{0};
};

}  // namespace

AttackOutcome run_attack(const DecisionOracle& decision, const Vector& x_init, const Vector& x_src,
                         const AttackConfig& cfg) {
  cfg.validate();
  if (x_init.dim() != x_src.dim()) throw ContractViolation("run_attack: dimension mismatch");

  QueryMeter meter(decision, cfg.max_queries);
  const DecisionOracle metered = meter.as_oracle();
  RngStream rng(cfg.seed);
  const double dim = static_cast<double>(x_init.dim());

  AttackTrace trace{x_init, {}, {}, TerminalReason::kBudgetExhausted};
  Vector current = x_init;

  auto record = [&](std::size_t t, double dist, double step, std::size_t batch, double delta, bool accepted) {
    IterationRecord r;
    r.t = t;
    r.queries_used = meter.used();
    r.dist = dist;
    r.step_size = step;
    r.batch_size = batch;
    r.delta = delta;
    r.accepted = accepted;
    if (cfg.record_iterates) r.iterate = current;
    trace.records.push_back(std::move(r));
  };

  try {
    meter.set_phase(Phase::kVerify);
    if (!metered.query(x_init)) throw InvalidEndpoints("run_attack: start point is not adversarial");
    if (metered.query(x_src)) throw InvalidEndpoints("run_attack: destination is already adversarial");

    meter.set_phase(Phase::kBinarySearch);
    current = binary_search_boundary(metered, current, x_src, cfg.theta_bin).point;
    double dist = l2_distance(current, x_src);
    record(0, dist, 0.0, 0, 0.0, true);

    for (std::size_t t = 1;; ++t) {
      if (dist <= cfg.convergence_tol) {
        trace.terminal = TerminalReason::kConverged;
        break;
      }
      if (cfg.max_iterations != 0 && t > cfg.max_iterations) {
        trace.terminal = TerminalReason::kMaxIterations;
        break;
      }
      const double root_t = std::sqrt(static_cast<double>(t));
      const auto batch = static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.b0) * root_t));
      const double delta = cfg.delta_scale * dist / dim;
      if (meter.remaining() < batch) {
        trace.terminal = TerminalReason::kBudgetExhausted;
        break;
      }

      meter.set_phase(Phase::kGradient);
      const Vector direction = estimate_gradient_direction(metered, current, delta, batch, rng, cfg.bounds);

      meter.set_phase(Phase::kStepSearch);
      StepResult step{current, 0.0, 0, 0};
      try {
        step = geometric_step_search(metered, current, direction, dist / root_t, cfg.bounds, cfg.k_max);
      } catch (const StepSearchFailed&) {
        record(t, dist, 0.0, batch, delta, false);
        continue;
      }

      meter.set_phase(Phase::kBinarySearch);
      Vector proposal = binary_search_boundary(metered, step.point, x_src, cfg.theta_bin).point;
      const double proposal_dist = l2_distance(proposal, x_src);
      const bool accepted = proposal_dist < dist;
      if (accepted) {
        current = std::move(proposal);
        dist = proposal_dist;
      }
      record(t, dist, step.step, batch, delta, accepted);
    }
  } catch (const BudgetExhausted&) {
    trace.terminal = TerminalReason::kBudgetExhausted;
  }

  trace.queries = meter.snapshot();
  return {current, std::move(trace)};
}

const IterationRecord* last_record_within(const AttackTrace& trace, std::uint64_t budget) {
  const IterationRecord* last = nullptr;
  for (const auto& r : trace.records) {
    if (r.queries_used > budget) break;
    last = &r;
  }
  return last;
}

Vector checkpoint_at(const AttackTrace& trace, std::uint64_t budget) {
  const IterationRecord* r = last_record_within(trace, budget);
  if (r == nullptr) return trace.initial;
  if (!r->iterate) throw ContractViolation("checkpoint_at: trace was recorded without iterates");
  return *r->iterate;
}

}  // namespace lhsja
