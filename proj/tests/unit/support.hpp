#ifndef LHSJA_TESTS_SUPPORT_HPP
#define LHSJA_TESTS_SUPPORT_HPP

#include <atomic>
#include <cmath>
#include <memory>
#include <vector>

#include "lhsja/hsja.hpp"
#include "lhsja/oracles.hpp"
#include "lhsja/random.hpp"
#include "lhsja/vector.hpp"

namespace lhsja::testing {

inline Vector uniform_vector(std::size_t dim, RngStream& rng, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(dim);
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return Vector(std::move(v));
}

/// Half-space {x : a.x >= c}; a has unit norm so a.x - c is a signed distance.
struct HalfSpace {
  Vector a;
  double c = 0.0;

  static HalfSpace random(std::size_t dim, RngStream& rng) {
    return {sample_unit_sphere(dim, rng), 0.0};
  }
  double signed_distance(const Vector& x) const { return dot(a, x) - c; }
  bool contains(const Vector& x) const { return signed_distance(x) >= 0.0; }
  /// Orthogonal projection of x onto the hyperplane.
  Vector project(const Vector& x) const { return axpy(x, -signed_distance(x), a); }
};

inline DecisionOracle halfspace_decision(const HalfSpace& h, std::atomic<std::uint64_t>* calls = nullptr) {
  return DecisionOracle{[h, calls](const Vector& x) {
                          if (calls != nullptr) calls->fetch_add(1);
                          return h.contains(x);
                        },
                        true};
}

/// Two-class classifier: label 1 inside the half-space, 0 outside.
class HalfSpaceClassifier final : public ClassifierOracle {
 public:
  explicit HalfSpaceClassifier(HalfSpace h) : h_(std::move(h)) {}
  Classification classify(const Vector& x) const override {
    const double s = h_.signed_distance(x);
    return {Label{s >= 0.0 ? 1u : 0u}, 1.0 / (1.0 + std::exp(-std::abs(s) * 10.0))};
  }
  std::size_t num_classes() const override { return 2; }
  std::size_t input_dim() const override { return h_.a.dim(); }
  bool concurrent() const override { return true; }

 private:
  HalfSpace h_;
};

/// Identity map between latents and images of equal dimension.
class IdentityGenerator final : public GeneratorOracle {
 public:
  explicit IdentityGenerator(std::size_t dim) : dim_(dim) {}
  Vector generate(const Vector& w) const override { return w; }
  std::size_t latent_dim() const override { return dim_; }
  std::size_t image_dim() const override { return dim_; }
  BoundsBox latent_bounds() const override { return {0.0, 1.0}; }
  bool concurrent() const override { return true; }

 private:
  std::size_t dim_;
};

class IdentityEncoder final : public EncoderOracle {
 public:
  explicit IdentityEncoder(std::size_t dim) : dim_(dim) {}
  Vector encode(const Vector& x) const override { return x; }
  std::size_t image_dim() const override { return dim_; }
  std::size_t latent_dim() const override { return dim_; }

 private:
  std::size_t dim_;
};

/// Every replayed iterate of a trace, in order.
inline std::vector<Vector> trace_iterates(const AttackTrace& t) {
  std::vector<Vector> out;
  for (const auto& r : t.records) {
    if (r.iterate) out.push_back(*r.iterate);
  }
  return out;
}

}  // namespace lhsja::testing

#endif  // LHSJA_TESTS_SUPPORT_HPP
