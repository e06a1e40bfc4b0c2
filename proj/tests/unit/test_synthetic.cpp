#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "lhsja/errors.hpp"
#include "lhsja/synthetic.hpp"
#include "support.hpp"

namespace lhsja {
namespace {

TEST(SyntheticSuiteTest, TwoClassLabeledSetIsClassifiedCorrectly) {
  SuiteParams p;
  p.num_classes = 2;
  p.latent_dim = 2;
  p.image_dim = 4;
  p.samples_per_class = 50;
  p.intra_radius = 0.1;
  const SyntheticSuite s = make_suite(p);
  ASSERT_EQ(s.samples.size(), 100u);
  for (const auto& smp : s.samples) EXPECT_EQ(s.classifier->classify(smp.image).label, smp.label);
}

TEST(SyntheticSuiteTest, DefaultLabeledSetIsClassifiedCorrectly) {
  const SyntheticSuite s = make_suite(SuiteParams{});
  ASSERT_EQ(s.samples.size(), 200u);
  for (const auto& smp : s.samples) {
    EXPECT_EQ(s.classifier->classify(smp.image).label, smp.label);
    EXPECT_TRUE(s.generator->latent_bounds().contains(smp.latent));
    EXPECT_EQ(s.generator->generate(smp.latent), smp.image);
  }
}

TEST(SyntheticSuiteTest, CentroidsAreWellSeparated) {
  const SyntheticSuite s = make_suite(SuiteParams{});
  const double min_gap = 4.0 * s.params.intra_radius;
  for (std::size_t i = 0; i < s.latent_centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < s.latent_centroids.size(); ++j) {
      EXPECT_GE(l2_distance(s.latent_centroids[i], s.latent_centroids[j]), min_gap);
    }
  }
}

TEST(SyntheticSuiteTest, IdentityMatrixGivesIdentityMaps) {
  const std::size_t d = 5;
  std::vector<double> eye(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) eye[i * d + i] = 1.0;
  const LinearGenerator g(d, d, eye, Vector::filled(d, 0.0), false);
  const PseudoInverseEncoder e(g);
  RngStream rng(RngSeed{1});
  for (int i = 0; i < 50; ++i) {
    const Vector w = testing::uniform_vector(d, rng);
    EXPECT_EQ(g.generate(w), w);
    const Vector back = e.encode(w);
    for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(back[k], w[k], 1e-12);
  }
}

TEST(SyntheticSuiteTest, EveryClassIsReachableFromTheLatentBox) {
  SuiteParams p;
  p.num_classes = 10;
  p.latent_dim = 32;
  const SyntheticSuite s = make_suite(p);
  std::set<std::uint32_t> reached;
  for (std::size_t k = 0; k < p.num_classes; ++k) {
    const Vector w = s.encoder->encode(s.classifier->centroids()[k]);
    ASSERT_TRUE(s.generator->latent_bounds().contains(w));
    const Label got = s.classifier->classify(s.generator->generate(w)).label;
    EXPECT_EQ(got.id, k);
    reached.insert(got.id);
  }
  EXPECT_EQ(reached.size(), 10u);
}

TEST(SyntheticSuiteTest, EncoderInvertsGeneratorInsideTheBox) {
  const SyntheticSuite s = make_suite(SuiteParams{});
  RngStream rng(RngSeed{2});
  for (int i = 0; i < 100; ++i) {
    const Vector w = testing::uniform_vector(s.params.latent_dim, rng);
    if (s.generator->squash_active(w)) continue;
    EXPECT_LT(l2_distance(s.encoder->encode(s.generator->generate(w)), w), 1e-9);
  }
}

TEST(SyntheticSuiteTest, SameSeedSameSuite) {
  SuiteParams p;
  p.seed = 9;
  const SyntheticSuite a = make_suite(p);
  const SyntheticSuite b = make_suite(p);
  EXPECT_EQ(suite_to_json(a), suite_to_json(b));
  EXPECT_EQ(suite_fingerprint(a), suite_fingerprint(b));
  p.seed = 10;
  EXPECT_NE(suite_fingerprint(make_suite(p)), suite_fingerprint(a));
}

TEST(SyntheticSuiteTest, JsonRoundTripPreservesOracles) {
  SuiteParams p;
  p.seed = 3;
  p.latent_dim = 8;
  p.image_dim = 24;
  p.num_classes = 4;
  const SyntheticSuite a = make_suite(p);
  const std::string text = suite_to_json(a);
  const SyntheticSuite b = suite_from_json(text);
  EXPECT_EQ(suite_to_json(b), text);
  EXPECT_EQ(suite_fingerprint(b), suite_fingerprint(a));
  RngStream rng(RngSeed{4});
  for (int i = 0; i < 100; ++i) {
    const Vector w = testing::uniform_vector(p.latent_dim, rng);
    const Vector x = a.generator->generate(w);
    EXPECT_EQ(b.generator->generate(w), x);
    EXPECT_EQ(b.classifier->classify(x).label, a.classifier->classify(x).label);
    EXPECT_EQ(b.encoder->encode(x), a.encoder->encode(x));
  }
}

TEST(SyntheticSuiteTest, InfeasibleSeparationFails) {
  SuiteParams p;
  p.latent_dim = 1;
  p.image_dim = 2;
  p.num_classes = 10;
  p.intra_radius = 0.2;  // needs 0.8 spacing inside a 0.6-wide box
  EXPECT_THROW(make_suite(p), SuiteConstructionFailed);
}

TEST(CentroidClassifierTest, TiesGoToLowestIndex) {
  const Vector a{0.0, 0.0};
  const Vector b{2.0, 0.0};
  const Vector mid{1.0, 0.0};
  EXPECT_EQ(CentroidClassifier({a, b}, 0.1).classify(mid).label, Label{0});
  EXPECT_EQ(CentroidClassifier({b, a}, 0.1).classify(mid).label, Label{0});
  EXPECT_EQ(CentroidClassifier({b, a}, 0.1).classify(Vector{0.1, 0.0}).label, Label{1});
}

TEST(CentroidClassifierTest, ConfidenceIsSoftmaxOfNegativeDistance) {
  const CentroidClassifier c({Vector{0.0}, Vector{1.0}, Vector{3.0}}, 0.5);
  const Vector x{0.2};
  double z = 0.0;
  for (double d : {0.2, 0.8, 2.8}) z += std::exp(-d / 0.5);
  const auto r = c.classify(x);
  EXPECT_EQ(r.label, Label{0});
  ASSERT_TRUE(r.confidence.has_value());
  EXPECT_NEAR(*r.confidence, std::exp(-0.2 / 0.5) / z, 1e-12);
}

TEST(AnalyticDistanceTest, CentroidOfTargetIsHalfTheGap) {
  const CentroidClassifier c({Vector{0.0, 0.0}, Vector{4.0, 0.0}, Vector{0.0, 10.0}}, 0.1);
  EXPECT_DOUBLE_EQ(analytic_boundary_distance(c, Vector{0.0, 0.0}, Label{0}), 2.0);
}

TEST(AnalyticDistanceTest, PointOnBisectorIsZero) {
  const CentroidClassifier c({Vector{0.0, 0.0}, Vector{4.0, 0.0}}, 0.1);
  EXPECT_NEAR(analytic_boundary_distance(c, Vector{2.0, 7.0}, Label{1}), 0.0, 1e-15);
}

/// Walks from x along the unit normal of the (target, rival) bisector and
/// bisects on the sign of ||y - c_t|| - ||y - c_r||.
double line_search_distance(const Vector& x, const Vector& ct, const Vector& cr) {
  const Vector n = normalized(subtract(ct, cr));
  auto f = [&](double t) {
    const Vector y = axpy(x, t, n);
    return l2_distance(y, ct) - l2_distance(y, cr);
  };
  double lo = 0.0;
  double hi = 0.0;
  const double f0 = f(0.0);
  // Moving along +n approaches c_t; expand until the sign flips.
  const double dir = f0 > 0.0 ? 1.0 : -1.0;
  double stepv = 1e-3;
  hi = dir * stepv;
  while ((f(hi) > 0.0) == (f0 > 0.0)) {
    lo = hi;
    stepv *= 2.0;
    hi = dir * stepv;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) > 0.0) == (f0 > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(0.5 * (lo + hi));
}

TEST(AnalyticDistanceTest, MatchesLineSearchOnFiveClasses) {
  SuiteParams p;
  p.num_classes = 5;
  p.latent_dim = 8;
  p.image_dim = 32;
  const SyntheticSuite s = make_suite(p);
  const auto& cs = s.classifier->centroids();
  RngStream rng(RngSeed{5});
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = testing::uniform_vector(p.image_dim, rng);
    const Label target{static_cast<std::uint32_t>(rng.below(5))};
    std::size_t rival = 5;
    double best = INFINITY;
    for (std::size_t k = 0; k < 5; ++k) {
      if (k == target.id) continue;
      if (l2_distance(x, cs[k]) < best) {
        best = l2_distance(x, cs[k]);
        rival = k;
      }
    }
    const double expected = line_search_distance(x, cs[target.id], cs[rival]);
    EXPECT_NEAR(analytic_boundary_distance(*s.classifier, x, target), expected, 1e-6) << trial;
  }
}

TEST(AnalyticDistanceTest, RejectsBadTarget) {
  const CentroidClassifier c({Vector{0.0}, Vector{1.0}}, 0.1);
  EXPECT_THROW(analytic_boundary_distance(c, Vector{0.5}, Label{2}), ContractViolation);
}

}  // namespace
}  // namespace lhsja
