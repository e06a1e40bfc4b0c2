#ifndef LHSJA_LATENT_ATTACK_HPP
#define LHSJA_LATENT_ATTACK_HPP

// Latent-space attack: encode source and target, run the boundary attack on
// normalized latents through the generator, decode the result.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "lhsja/hsja.hpp"
#include "lhsja/oracles.hpp"
#include "lhsja/vector.hpp"

namespace lhsja {

/// Per-coordinate affine map from raw generator latents onto [0, 1].
class LatentNormalizer {
 public:
  /// Requires high[i] > low[i] for every coordinate.
  LatentNormalizer(Vector low, Vector high);

  /// Maps `box` itself onto [0, 1]; with box = [0, 1] this is the identity.
  static LatentNormalizer identity(std::size_t dim, BoundsBox box = {0.0, 1.0});

  /// Min/max per coordinate of encode(generate(w)) over `samples` latents
  /// drawn uniformly from the generator's latent box.
  static LatentNormalizer calibrate(const GeneratorOracle& g, const EncoderOracle& e, std::size_t samples = 1000,
                                    std::uint64_t seed = 0);

  std::size_t dim() const noexcept { return low_.dim(); }
  /// Unclamped forward map.
  Vector normalize(const Vector& raw) const;
  Vector denormalize(const Vector& unit) const;

  const Vector& low() const noexcept { return low_; }
  const Vector& high() const noexcept { return high_; }

 private:
  Vector low_;
  Vector high_;
};

/// Generator view whose latent space is the normalized box [0, 1]^d.
/// Denormalized latents are clamped into the inner generator's box.
class NormalizedGenerator : public GeneratorOracle {
 public:
  NormalizedGenerator(const GeneratorOracle& inner, LatentNormalizer normalizer);

  Vector generate(const Vector& unit_latent) const override;
  std::size_t latent_dim() const override { return inner_.latent_dim(); }
  std::size_t image_dim() const override { return inner_.image_dim(); }
  BoundsBox latent_bounds() const override { return {0.0, 1.0}; }
  bool concurrent() const override { return inner_.concurrent(); }
  std::string id() const override { return inner_.id() + "+normalized"; }

  const LatentNormalizer& normalizer() const noexcept { return normalizer_; }

 private:
  const GeneratorOracle& inner_;
  LatentNormalizer normalizer_;
};

struct EncodedPair {
  Vector w_src;
  Vector w_trg;
};

/// Encodes both images to normalized latents clamped to [0, 1] and checks
/// that G(w_trg) classifies as `target`. The check is billed to
/// `pre_attack`, never to the attack budget. Throws EncodingInvalid when it
/// fails.
EncodedPair encode_pair(const EncoderOracle& enc, const NormalizedGenerator& g, const ClassifierOracle& c,
                        const Vector& x_src, const Vector& x_trg, Label target, QueryLedger& pre_attack);

struct LatentAttackJob {
  Vector x_src;
  /// Target image; may be omitted when `w_init` is supplied.
  std::optional<Vector> x_trg;
  Label target;
  /// Bounds are forced to [0, 1] (the normalized latent box).
  AttackConfig cfg;
  OracleSet oracles;
  LatentNormalizer normalizer;
  /// Normalized start latent, e.g. from a TargetBank. Replaces encode(x_trg).
  std::optional<Vector> w_init;
};

struct LatentAttackResult {
  Vector w_src;
  Vector w_start;
  Vector w_adv;
  Vector x_adv;
  AttackTrace trace;
  double initial_latent_dist = 0.0;
  double final_latent_dist = 0.0;
  /// ||x_adv - x_src|| in image space.
  double final_image_dist = 0.0;
  /// "sim": embedding cosine between x_src and G(w_adv), when an embedder
  /// is available. "lpips": always absent in-process.
  std::map<std::string, std::optional<double>> similarity_scores;
  std::uint64_t pre_attack_queries = 0;
  std::uint64_t attack_queries = 0;
  std::uint64_t generations = 0;
};

/// Validates the job (F(x_src) != target, F(x_trg) == target, distinct
/// latents) on a separate ledger, then attacks in latent space minimizing
/// l2 distance to w_src under F(G(w)) == target.
LatentAttackResult latent_hsja(const LatentAttackJob& job);

/// The same engine applied directly to images in [0, 1].
AttackOutcome image_hsja_baseline(const Vector& x_src, const Vector& x_trg, Label target, const ClassifierOracle& c,
                                  AttackConfig cfg);

std::string attack_config_to_json(const AttackConfig& cfg);
AttackConfig attack_config_from_json(const std::string& text);

/// Everything needed to replay a single run bit-exactly, plus its outcome.
struct RunManifest {
  std::string method = "latent_hsja";
  std::string suite_path;
  std::uint64_t suite_fingerprint = 0;
  Label src_class;
  std::size_t src_index = 0;
  Label trg_class;
  std::size_t trg_index = 0;
  AttackConfig config;
  std::size_t calibration_samples = 1000;
  std::uint64_t calibration_seed = 0;
  std::optional<LatentNormalizer> normalization;
  std::map<std::string, std::string> oracle_ids;
  std::string terminal;
  std::map<std::string, double> metrics;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

}  // namespace lhsja

#endif  // LHSJA_LATENT_ATTACK_HPP
