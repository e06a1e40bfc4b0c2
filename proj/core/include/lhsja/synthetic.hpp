#ifndef LHSJA_SYNTHETIC_HPP
#define LHSJA_SYNTHETIC_HPP

// Desk-scale analytic oracles: a linear generator with orthonormal columns,
// a nearest-centroid classifier and the generator's exact pseudo-inverse.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lhsja/oracles.hpp"
#include "lhsja/vector.hpp"

namespace lhsja {

/// generate(w) = A w + b, optionally clamped to [0, 1] per coordinate.
class LinearGenerator : public GeneratorOracle {
 public:
  /// `matrix` is image_dim x latent_dim, row-major.
  LinearGenerator(std::size_t image_dim, std::size_t latent_dim, std::vector<double> matrix, Vector offset,
                  bool squash, BoundsBox latent_bounds = {0.0, 1.0});

  Vector generate(const Vector& latent) const override;
  std::size_t latent_dim() const override { return latent_dim_; }
  std::size_t image_dim() const override { return image_dim_; }
  BoundsBox latent_bounds() const override { return latent_bounds_; }
  bool concurrent() const override { return true; }
  std::string id() const override { return "linear-generator"; }

  /// A w + b without the squash.
  Vector affine(const Vector& latent) const;
  /// True when the squash changes generate(latent).
  bool squash_active(const Vector& latent) const;

  const std::vector<double>& matrix() const noexcept { return matrix_; }
  const Vector& offset() const noexcept { return offset_; }
  bool squash() const noexcept { return squash_; }

 private:
  std::size_t image_dim_;
  std::size_t latent_dim_;
  std::vector<double> matrix_;
  Vector offset_;
  bool squash_;
  BoundsBox latent_bounds_;
};

/// argmin_k ||x - c_k||, ties to the lowest index. Confidence is the winning
/// entry of softmax(-||x - c_k|| / temperature).
class CentroidClassifier : public ClassifierOracle {
 public:
  CentroidClassifier(std::vector<Vector> centroids, double temperature);

  Classification classify(const Vector& image) const override;
  std::size_t num_classes() const override { return centroids_.size(); }
  std::size_t input_dim() const override { return centroids_.front().dim(); }
  bool concurrent() const override { return true; }
  std::string id() const override { return "centroid-classifier"; }

  const std::vector<Vector>& centroids() const noexcept { return centroids_; }
  double temperature() const noexcept { return temperature_; }

 private:
  std::vector<Vector> centroids_;
  double temperature_;
};

/// encode(x) = pinv(A) (x - b). Exact inverse of the generator wherever
/// the squash is inactive.
class PseudoInverseEncoder : public EncoderOracle {
 public:
  explicit PseudoInverseEncoder(const LinearGenerator& generator);

  Vector encode(const Vector& image) const override;
  std::size_t image_dim() const override { return image_dim_; }
  std::size_t latent_dim() const override { return latent_dim_; }
  std::string id() const override { return "pinv-encoder"; }

 private:
  std::size_t image_dim_;
  std::size_t latent_dim_;
  std::vector<double> pinv_;  // latent_dim x image_dim, row-major
  Vector offset_;
};

struct SuiteParams {
  std::size_t latent_dim = 32;
  std::size_t image_dim = 256;
  std::size_t num_classes = 10;
  std::size_t samples_per_class = 20;
  std::uint64_t seed = 0;
  double temperature = 0.05;
  /// Labeled samples lie within this latent radius of their class centroid.
  double intra_radius = 0.15;
  /// Latent class centroids are drawn uniformly from this box.
  BoundsBox centroid_box{0.2, 0.8};
  bool squash = true;
};

struct LabeledSample {
  Vector image;
  Vector latent;
  Label label;
};

struct SyntheticSuite {
  SuiteParams params;
  std::shared_ptr<const LinearGenerator> generator;
  std::shared_ptr<const CentroidClassifier> classifier;
  std::shared_ptr<const PseudoInverseEncoder> encoder;
  /// Latent preimages of the classifier centroids.
  std::vector<Vector> latent_centroids;
  /// Grouped by class, samples_per_class each.
  std::vector<LabeledSample> samples;

  OracleSet oracles() const;
  /// The `index`-th labeled sample of class `label`.
  const LabeledSample& sample_of(Label label, std::size_t index) const;
};

/// Builds a suite fully determined by params.seed. Centroids are pairwise at
/// least 4 * intra_radius apart and the labeled set is classified 100%
/// correctly; otherwise retries up to 100 times, then SuiteConstructionFailed.
SyntheticSuite make_suite(const SuiteParams& params);

/// Distance from x to the bisector hyperplane between the target centroid
/// and the non-target centroid nearest to x.
double analytic_boundary_distance(const CentroidClassifier& c, const Vector& x, Label target);

std::string suite_to_json(const SyntheticSuite& suite);
SyntheticSuite suite_from_json(const std::string& text);
/// FNV-1a over the canonical JSON form.
std::uint64_t suite_fingerprint(const SyntheticSuite& suite);

}  // namespace lhsja

#endif  // LHSJA_SYNTHETIC_HPP
