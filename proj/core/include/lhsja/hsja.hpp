#ifndef LHSJA_HSJA_HPP
#define LHSJA_HSJA_HPP

// Decision-based boundary attack (HopSkipJump structure) over a bounded
// vector space. The engine only sees a hard-label membership predicate, so
// the same code runs in image space and in a generator's latent space.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lhsja/random.hpp"
#include "lhsja/vector.hpp"

namespace lhsja {

/// Hard-label predicate under attack: true means "adversarial". Every call
/// is one victim query.
struct DecisionOracle {
  std::function<bool(const Vector&)> query;
  /// Set when `query` may run on several threads at once.
  bool concurrent = false;
};

enum class DistanceKind { kL2 };

struct AttackConfig {
  /// Binary-search stop tolerance, relative to the searched segment length.
  double theta_bin = 1e-3;
  /// Gradient batch at iteration t is ceil(b0 * sqrt(t)).
  std::size_t b0 = 20;
  /// Probe radius at iteration t is delta_scale * dist_t / dim.
  double delta_scale = 1.0;
  std::uint64_t max_queries = 20000;
  RngSeed seed{0};
  BoundsBox bounds{0.0, 1.0};
  DistanceKind distance = DistanceKind::kL2;
  /// Step search tries initial_step / 2^k for k = 0..k_max.
  int k_max = 20;
  /// 0 means no iteration cap.
  std::size_t max_iterations = 0;
  /// Stop once the distance to the destination is at most this.
  double convergence_tol = 1e-12;
  /// Keep every accepted iterate in the trace (needed for checkpointing and replay).
  bool record_iterates = true;

  void validate() const;
};

enum class TerminalReason { kBudgetExhausted, kConverged, kMaxIterations };

std::string to_string(TerminalReason r);
TerminalReason terminal_reason_from_string(const std::string& s);

/// State after one completed engine iteration. Iteration 0 is the initial
/// projection of the start point onto the boundary.
struct IterationRecord {
  std::size_t t = 0;
  /// Cumulative classifier queries when the iteration finished.
  std::uint64_t queries_used = 0;
  /// Distance from the current (accepted) iterate to the destination.
  double dist = 0.0;
  double step_size = 0.0;
  std::size_t batch_size = 0;
  double delta = 0.0;
  /// False when the proposal did not move closer and was discarded.
  bool accepted = true;
  std::optional<Vector> iterate;
};

/// Queries spent per engine phase, including partial phases cut short by
/// the budget.
struct PhaseQueries {
  std::uint64_t verify = 0;
  std::uint64_t binary_search = 0;
  std::uint64_t gradient = 0;
  std::uint64_t step_search = 0;

  std::uint64_t total() const noexcept { return verify + binary_search + gradient + step_search; }
  bool operator==(const PhaseQueries&) const = default;
};

struct AttackTrace {
  Vector initial;
  std::vector<IterationRecord> records;
  PhaseQueries queries;
  TerminalReason terminal = TerminalReason::kBudgetExhausted;

  std::uint64_t total_queries() const noexcept { return queries.total(); }
};

struct AttackOutcome {
  Vector x_adv;
  AttackTrace trace;
};

enum class EndpointCheck {
  /// Caller guarantees decision(x_adv) && !decision(x_src); no extra queries.
  kTrusted,
  /// Spend two queries to confirm both endpoints first.
  kVerify,
};

struct BoundarySearchResult {
  /// Adversarial point on [x_src, x_adv].
  Vector point;
  /// Final bracket width as a fraction of ||x_adv - x_src||.
  double relative_width = 0.0;
  std::size_t queries = 0;
};

/// Bisects the segment from x_src (not adversarial) to x_adv (adversarial)
/// until the bracket is narrower than theta times the segment length. The
/// adversarial end of the bracket is returned. Costs ceil(log2(1/theta))
/// queries (+1 when 1/theta is a power of two), plus two under kVerify.
BoundarySearchResult binary_search_boundary(const DecisionOracle& decision, const Vector& x_adv,
                                            const Vector& x_src, double theta,
                                            EndpointCheck check = EndpointCheck::kTrusted);

/// Baseline-corrected sign-probe estimate of the boundary normal at x_b,
/// pointing into the adversarial region. Spends exactly `batch` queries on
/// probes clamp(x_b + delta * u_b) with u_b uniform on the unit sphere.
/// When every probe agrees, returns sign * u_1.
Vector estimate_gradient_direction(const DecisionOracle& decision, const Vector& x_b, double delta,
                                   std::size_t batch, RngStream& rng, const BoundsBox& bounds);

struct StepResult {
  Vector point;
  double step = 0.0;
  int halvings = 0;
  std::size_t queries = 0;
};

/// Tries clamp(x_b + (initial_step / 2^k) * v) for k = 0..k_max and returns
/// the first adversarial candidate. initial_step == 0 returns x_b without a
/// query. Throws StepSearchFailed after k_max + 1 rejected candidates.
StepResult geometric_step_search(const DecisionOracle& decision, const Vector& x_b, const Vector& v,
                                 double initial_step, const BoundsBox& bounds, int k_max = 20);

/// Runs the attack from x_init (adversarial) toward x_src (not adversarial)
/// until the budget is spent. Both endpoints are verified first (two
/// queries). Iterates are accepted only when they strictly reduce the
/// distance, so the returned point is always adversarial and trace
/// distances never increase. A gradient batch that the remaining budget
/// cannot fully pay for ends the run, so a run with budget b reproduces
/// the prefix of any longer run with the same seed.
AttackOutcome run_attack(const DecisionOracle& decision, const Vector& x_init, const Vector& x_src,
                         const AttackConfig& cfg);

/// Last record whose queries_used <= budget, or nullptr.
const IterationRecord* last_record_within(const AttackTrace& trace, std::uint64_t budget);

/// Iterate the engine held after spending at most `budget` queries: the
/// start point when no iteration had completed yet. Needs record_iterates.
Vector checkpoint_at(const AttackTrace& trace, std::uint64_t budget);

/// Trace as pretty-printed JSON; byte-identical for identical traces.
std::string trace_to_json(const AttackTrace& trace);
AttackTrace trace_from_json(const std::string& text);

}  // namespace lhsja

#endif  // LHSJA_HSJA_HPP
