#ifndef LHSJA_METRICS_HPP
#define LHSJA_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lhsja/oracles.hpp"
#include "lhsja/vector.hpp"

namespace lhsja {

/// (a . b) / (||a|| ||b||). Throws ContractViolation on a zero-norm input.
double cosine_similarity(const Vector& a, const Vector& b);

/// Weight-free stand-in for a face embedder: a fixed random projection with
/// orthonormal rows applied to the centred image. Approximately preserves
/// l2 geometry, so cosine similarity stays meaningful.
class ProjectionEmbedder : public EmbeddingOracle {
 public:
  /// embed_dim is capped at image_dim. `center` is subtracted per coordinate.
  ProjectionEmbedder(std::size_t image_dim, std::size_t embed_dim = 128, std::uint64_t seed = 0, double center = 0.5);

  Vector embed(const Vector& image) const override;
  std::size_t embed_dim() const override { return embed_dim_; }
  std::string name() const override { return "projection"; }

 private:
  std::size_t image_dim_;
  std::size_t embed_dim_;
  double center_;
  std::vector<double> rows_;  // embed_dim x image_dim, row-major
};

}  // namespace lhsja

#endif  // LHSJA_METRICS_HPP
