#ifndef LHSJA_SWEEP_HPP
#define LHSJA_SWEEP_HPP

// Budget-sweep experiment: latent-space vs image-space attack on the same
// (source, target) pairs, metrics sampled at a grid of query budgets.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lhsja/hsja.hpp"
#include "lhsja/latent_attack.hpp"
#include "lhsja/oracles.hpp"
#include "lhsja/synthetic.hpp"

namespace lhsja {

enum class SweepMethod { kLatentHsja, kImageHsja };

std::string to_string(SweepMethod m);
SweepMethod sweep_method_from_string(const std::string& s);

struct SweepPair {
  Vector x_src;
  Vector x_trg;
  Label target;
};

inline const std::vector<std::uint64_t> kDefaultBudgetGrid = {500, 1000, 3000, 5000, 10000, 20000};

struct SweepOptions {
  std::vector<std::uint64_t> grid = kDefaultBudgetGrid;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<SweepMethod> methods = {SweepMethod::kLatentHsja, SweepMethod::kImageHsja};
  /// max_queries and seed are overridden per cell.
  AttackConfig base_config;
  /// Calibrated from the oracles (1000 samples, seed 0) when absent.
  std::optional<LatentNormalizer> normalizer;
  /// Worker threads; 0 means hardware concurrency. Forced to 1 when the
  /// oracles are not concurrency-safe.
  std::size_t parallelism = 0;
  /// Optional perceptual-distance slot; the lpips column stays empty without it.
  std::function<double(const Vector&, const Vector&)> lpips;
};

struct SweepRow {
  SweepMethod method = SweepMethod::kLatentHsja;
  std::size_t pair = 0;
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;
  /// Query count of the checkpointed iterate.
  std::uint64_t queries = 0;
  std::optional<double> latent_l2;
  double image_l2 = 0.0;
  std::optional<double> sim;
  std::optional<double> lpips;

  bool operator==(const SweepRow&) const = default;
};

struct SweepFailure {
  SweepMethod method = SweepMethod::kLatentHsja;
  std::size_t pair = 0;
  std::uint64_t seed = 0;
  std::string kind;
  std::string message;
};

struct SweepAggregate {
  SweepMethod method = SweepMethod::kLatentHsja;
  std::uint64_t budget = 0;
  std::size_t n = 0;
  double mean_image_l2 = 0.0;
  double median_image_l2 = 0.0;
  std::optional<double> mean_latent_l2;
  std::optional<double> median_latent_l2;
  std::optional<double> mean_sim;
  std::optional<double> median_sim;
  std::optional<double> stddev_sim;
};

struct SweepReport {
  /// Sorted by (method, pair, seed, budget).
  std::vector<SweepRow> rows;
  std::vector<SweepFailure> failures;

  std::vector<SweepAggregate> aggregates() const;
};

/// Runs one attack per (method, pair, seed) at the largest grid budget and
/// reads metrics off the trace at every grid point. Per-cell failures are
/// recorded, never thrown.
SweepReport run_sweep(const OracleSet& oracles, std::span<const SweepPair> pairs, const SweepOptions& options);

/// A fresh run truncated at `budget`; used to check checkpoint equivalence.
SweepRow run_cell(const OracleSet& oracles, const SweepPair& pair, std::size_t pair_index, SweepMethod method,
                  std::uint64_t seed, std::uint64_t budget, const SweepOptions& options);

/// Where sweep targets come from. Labeled samples sit close to their class
/// centroid, so the segment between two of them already crosses the boundary
/// almost at the closest point and leaves an attack little to improve.
/// Generator samples are drawn uniformly from the latent box and land
/// anywhere in their class region.
enum class PairTargets { kGeneratorSamples, kLabeledSamples };

std::string to_string(PairTargets t);
PairTargets pair_targets_from_string(const std::string& s);

/// Deterministic pairs: the source is a labeled sample; the target is a
/// sample of a different class drawn per `targets`.
std::vector<SweepPair> make_sweep_pairs(const SyntheticSuite& suite, std::size_t count, std::uint64_t seed,
                                        PairTargets targets = PairTargets::kGeneratorSamples);

/// Header: method,pair,seed,budget,queries,latent_l2,image_l2,sim,lpips.
/// Absent values are empty fields; reals use shortest round-trip form.
std::string sweep_to_csv(const SweepReport& report);
/// Parses rows written by sweep_to_csv (failures are not part of the CSV).
SweepReport sweep_from_csv(const std::string& text);
std::string aggregates_to_csv(const std::vector<SweepAggregate>& aggregates);
std::string failures_to_csv(const std::vector<SweepFailure>& failures);

}  // namespace lhsja

#endif  // LHSJA_SWEEP_HPP
