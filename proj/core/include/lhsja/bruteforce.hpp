#ifndef LHSJA_BRUTEFORCE_HPP
#define LHSJA_BRUTEFORCE_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lhsja/latent_attack.hpp"
#include "lhsja/oracles.hpp"
#include "lhsja/random.hpp"
#include "lhsja/vector.hpp"

namespace lhsja {

enum class SamplerKind { kUniformBox, kGaussian };

std::string to_string(SamplerKind k);

/// Distribution random latents are drawn from.
struct LatentSampler {
  SamplerKind kind = SamplerKind::kUniformBox;
  BoundsBox box{0.0, 1.0};
  /// Per-coordinate moments; used by kGaussian only.
  std::optional<Vector> mean;
  std::optional<Vector> stddev;

  static LatentSampler uniform(BoundsBox box = {0.0, 1.0});
  /// Gaussian draws are clamped into `box`.
  static LatentSampler gaussian(Vector mean, Vector stddev, BoundsBox box = {0.0, 1.0});
  /// Gaussian matched to the normalized encoder outputs of a calibration
  /// sample (same procedure as LatentNormalizer::calibrate).
  static LatentSampler gaussian_calibrated(const GeneratorOracle& raw_generator, const EncoderOracle& e,
                                           const LatentNormalizer& normalizer, std::size_t samples = 1000,
                                           std::uint64_t seed = 0);

  Vector draw(std::size_t dim, RngStream& rng) const;
};

struct CoverageRow {
  std::uint64_t budget = 0;
  /// Classes hit at least once.
  std::size_t count_any = 0;
  /// Classes hit with confidence > 0.5.
  std::size_t count_gt50 = 0;
  /// Classes hit with confidence > 0.9.
  std::size_t count_gt90 = 0;

  bool operator==(const CoverageRow&) const = default;
};

struct ClassCoverageTable {
  std::size_t num_classes = 0;
  std::vector<CoverageRow> rows;
};

struct BankEntry {
  Vector latent;
  /// Confidence at storage time; NaN-free, 0 when the oracle reports none.
  double confidence = 0.0;
  std::uint64_t sample_index = 0;
};

/// Highest-confidence latent found per class.
struct TargetBank {
  std::map<Label, BankEntry> entries;

  bool contains(Label l) const { return entries.count(l) != 0; }
};

struct BruteForceResult {
  ClassCoverageTable table;
  TargetBank bank;
  std::uint64_t queries = 0;
};

/// Draws latents cumulatively up to the largest budget, classifies G(w)
/// and snapshots coverage at every budget. Budgets must be ascending.
BruteForceResult brute_force_sample(const GeneratorOracle& g, const ClassifierOracle& c,
                                    std::span<const std::uint64_t> budgets, const LatentSampler& sampler,
                                    std::uint64_t seed);

/// Stored latent for `target`; throws TargetNotFound. Callers must re-check
/// the decision before attacking from it.
Vector seed_attack_from_bank(const TargetBank& bank, Label target);

/// CSV with header budget,count_any,count_gt50,count_gt90.
std::string coverage_to_csv(const ClassCoverageTable& table);
std::string bank_to_json(const TargetBank& bank, std::size_t num_classes);
TargetBank bank_from_json(const std::string& text);

}  // namespace lhsja

#endif  // LHSJA_BRUTEFORCE_HPP
