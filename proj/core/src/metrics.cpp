#include "lhsja/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lhsja/errors.hpp"
#include "lhsja/random.hpp"

namespace lhsja {

double cosine_similarity(const Vector& a, const Vector& b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw ContractViolation("cosine_similarity: zero-norm input");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

ProjectionEmbedder::ProjectionEmbedder(std::size_t image_dim, std::size_t embed_dim, std::uint64_t seed, double center)
    : image_dim_(image_dim), embed_dim_(std::min(embed_dim, image_dim)), center_(center) {
  if (image_dim_ == 0 || embed_dim_ == 0) throw ContractViolation("ProjectionEmbedder: dims must be >= 1");
  RngStream rng(RngSeed{seed});
  const auto n = static_cast<Eigen::Index>(image_dim_);
  const auto k = static_cast<Eigen::Index>(embed_dim_);
  Eigen::MatrixXd gauss(n, k);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) gauss(r, c) = rng.normal();
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ() *
                            Eigen::MatrixXd::Identity(n, k);
  rows_.resize(embed_dim_ * image_dim_);
  for (std::size_t r = 0; r < embed_dim_; ++r) {
    for (std::size_t c = 0; c < image_dim_; ++c) {
      rows_[r * image_dim_ + c] = q(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
    }
  }
}

Vector ProjectionEmbedder::embed(const Vector& image) const {
  if (image.dim() != image_dim_) throw ContractViolation("ProjectionEmbedder: image dim mismatch");
  std::vector<double> out(embed_dim_, 0.0);
  for (std::size_t r = 0; r < embed_dim_; ++r) {
    const double* row = rows_.data() + r * image_dim_;
    double acc = 0.0;
    for (std::size_t c = 0; c < image_dim_; ++c) acc += row[c] * (image[c] - center_);
    out[r] = acc;
  }
  return Vector(std::move(out));
}

}  // namespace lhsja
