#include <gtest/gtest.h>

#include <algorithm>

#include "lhsja/errors.hpp"
#include "lhsja/latent_attack.hpp"
#include "lhsja/metrics.hpp"
#include "lhsja/sweep.hpp"
#include "lhsja/synthetic.hpp"
#include "pilot_fixture.hpp"
#include "support.hpp"

namespace lhsja {
namespace {

class LatentAttackTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    suite_ = new SyntheticSuite(make_suite(SuiteParams{}));
    norm_ = new LatentNormalizer(LatentNormalizer::calibrate(*suite_->generator, *suite_->encoder));
  }
  static void TearDownTestSuite() {
    delete suite_;
    delete norm_;
  }

  static LatentAttackJob job_for(const SweepPair& p, std::uint64_t budget, std::uint64_t seed) {
    AttackConfig cfg;
    cfg.max_queries = budget;
    cfg.seed = RngSeed{seed};
    OracleSet o = suite_->oracles();
    o.embedder = std::make_shared<ProjectionEmbedder>(suite_->params.image_dim);
    return {p.x_src, p.x_trg, p.target, cfg, o, *norm_, std::nullopt};
  }

  static SyntheticSuite* suite_;
  static LatentNormalizer* norm_;
};
SyntheticSuite* LatentAttackTest::suite_ = nullptr;
LatentNormalizer* LatentAttackTest::norm_ = nullptr;

TEST_F(LatentAttackTest, PseudoInverseEncodingPreservesTargetClass) {
  const NormalizedGenerator g(*suite_->generator, *norm_);
  for (const auto& smp : suite_->samples) {
    const Vector w = clamp_to_bounds(norm_->normalize(suite_->encoder->encode(smp.image)), {0.0, 1.0});
    EXPECT_EQ(suite_->classifier->classify(g.generate(w)).label, smp.label);
  }
  const auto& src = suite_->sample_of(Label{0}, 0);
  const auto& trg = suite_->sample_of(Label{1}, 0);
  QueryLedger pre;
  const EncodedPair pair = encode_pair(*suite_->encoder, g, *suite_->classifier, src.image, trg.image, Label{1}, pre);
  EXPECT_EQ(pre.classify_count(), 1u);
  EXPECT_NE(pair.w_src, pair.w_trg);
}

TEST(EncodePairTest, IdentityMapsGiveIdentityLatents) {
  RngStream rng(RngSeed{1});
  testing::HalfSpace h = testing::HalfSpace::random(4, rng);
  h.c = dot(h.a, Vector::filled(4, 0.5));
  const testing::HalfSpaceClassifier c(h);
  const testing::IdentityGenerator raw(4);
  const testing::IdentityEncoder enc(4);
  const NormalizedGenerator g(raw, LatentNormalizer::identity(4));
  const Vector x_src = axpy(Vector::filled(4, 0.5), -0.2, h.a);
  const Vector x_trg = axpy(Vector::filled(4, 0.5), 0.2, h.a);
  QueryLedger pre;
  const EncodedPair p = encode_pair(enc, g, c, x_src, x_trg, Label{1}, pre);
  EXPECT_EQ(p.w_src, x_src);
  EXPECT_EQ(p.w_trg, x_trg);
}

/// Maps every image to the zero latent.
class ZeroEncoder final : public EncoderOracle {
 public:
  explicit ZeroEncoder(std::size_t latent, std::size_t image) : latent_(latent), image_(image) {}
  Vector encode(const Vector&) const override { return Vector::filled(latent_, 0.0); }
  std::size_t image_dim() const override { return image_; }
  std::size_t latent_dim() const override { return latent_; }

 private:
  std::size_t latent_;
  std::size_t image_;
};

TEST_F(LatentAttackTest, ZeroEncoderIsRejected) {
  const NormalizedGenerator g(*suite_->generator, LatentNormalizer::identity(suite_->params.latent_dim));
  const ZeroEncoder zero(suite_->params.latent_dim, suite_->params.image_dim);
  const Label zero_class = suite_->classifier->classify(g.generate(Vector::filled(suite_->params.latent_dim, 0.0))).label;
  const Label target{(zero_class.id + 1) % 10};
  const auto& src = suite_->sample_of(Label{(target.id + 1) % 10}, 0);
  const auto& trg = suite_->sample_of(target, 0);
  QueryLedger pre;
  EXPECT_THROW(encode_pair(zero, g, *suite_->classifier, src.image, trg.image, target, pre), EncodingInvalid);
}

TEST_F(LatentAttackTest, ZeroBudgetReturnsEncodedTarget) {
  const auto pairs = make_sweep_pairs(*suite_, 2, 0);
  for (const auto& p : pairs) {
    const LatentAttackResult r = latent_hsja(job_for(p, 0, 0));
    EXPECT_EQ(r.w_adv, r.w_start);
    EXPECT_EQ(r.x_adv, NormalizedGenerator(*suite_->generator, *norm_).generate(r.w_start));
    EXPECT_EQ(r.attack_queries, 0u);
    EXPECT_EQ(r.final_latent_dist, r.initial_latent_dist);
  }
}

TEST_F(LatentAttackTest, SameClassPairIsRejectedBeforeAttackQueries) {
  const auto& a = suite_->sample_of(Label{2}, 0);
  const auto& b = suite_->sample_of(Label{2}, 1);
  EXPECT_THROW(latent_hsja(job_for({a.image, b.image, Label{2}}, 1000, 0)), InvalidEndpoints);
}

TEST_F(LatentAttackTest, DriftedBankLatentIsRejected) {
  const auto& src = suite_->sample_of(Label{0}, 0);
  const auto& trg = suite_->sample_of(Label{1}, 0);
  LatentAttackJob job = job_for({src.image, trg.image, Label{1}}, 1000, 0);
  // A latent stored for class 1 against some other oracle now decodes to class 2.
  job.w_init = clamp_to_bounds(norm_->normalize(suite_->encoder->encode(suite_->sample_of(Label{2}, 0).image)),
                               {0.0, 1.0});
  EXPECT_THROW(latent_hsja(job), EncodingInvalid);
}

TEST_F(LatentAttackTest, IteratesStayInUnitBoxAndAdversarial) {
  const auto pairs = make_sweep_pairs(*suite_, 3, 1);
  const NormalizedGenerator g(*suite_->generator, *norm_);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const LatentAttackResult r = latent_hsja(job_for(pairs[i], 1500, i));
    const BoundsBox unit{0.0, 1.0};
    for (const Vector& w : testing::trace_iterates(r.trace)) {
      EXPECT_TRUE(unit.contains(w));
      EXPECT_EQ(suite_->classifier->classify(g.generate(w)).label, pairs[i].target);
    }
    EXPECT_EQ(r.attack_queries, r.trace.total_queries());
    EXPECT_LE(r.final_latent_dist, r.initial_latent_dist);
    ASSERT_TRUE(r.similarity_scores.at("sim").has_value());
    EXPECT_FALSE(r.similarity_scores.at("lpips").has_value());
  }
}

TEST_F(LatentAttackTest, MedianDistanceRatioMeetsPilotThreshold) {
  const testing::PilotFixture f = testing::load_pilot_fixture(LHSJA_FIXTURE_DIR);
  ASSERT_EQ(suite_fingerprint(*suite_), f.fingerprint) << "pilot fixture was recorded on a different suite";
  const auto pairs = make_sweep_pairs(*suite_, f.pair_count, f.pair_seed, pair_targets_from_string(f.pair_targets));
  const SweepPair& pair = pairs.at(f.ratio_pair);
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < f.ratio_seeds; ++seed) {
    const LatentAttackResult r = latent_hsja(job_for(pair, f.ratio_budget, seed));
    ratios.push_back(r.final_latent_dist / r.initial_latent_dist);
  }
  std::sort(ratios.begin(), ratios.end());
  const std::size_t n = ratios.size();
  const double median = n % 2 == 1 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  EXPECT_LE(median, f.latent_dist_ratio_max);
}

TEST_F(LatentAttackTest, ImageBaselineZeroBudgetReturnsTarget) {
  const SweepPair p = make_sweep_pairs(*suite_, 1, 0).front();
  AttackConfig cfg;
  cfg.max_queries = 0;
  const AttackOutcome out = image_hsja_baseline(p.x_src, p.x_trg, p.target, *suite_->classifier, cfg);
  EXPECT_EQ(out.x_adv, p.x_trg);
}

TEST(ImageBaselineTest, TwoDimensionalToyReachesProjection) {
  RngStream rng(RngSeed{2});
  testing::HalfSpace h = testing::HalfSpace::random(2, rng);
  h.c = dot(h.a, Vector{0.5, 0.5});
  const testing::HalfSpaceClassifier c(h);
  const Vector x_src = axpy(Vector{0.5, 0.5}, -0.1, h.a);
  const Vector x_trg = axpy(Vector{0.5, 0.5}, 0.25, h.a);
  AttackConfig cfg;
  cfg.max_queries = 2000;
  const AttackOutcome out = image_hsja_baseline(x_src, x_trg, Label{1}, c, cfg);
  EXPECT_LE(l2_distance(out.x_adv, x_src), 1.05 * 0.1);
}

TEST(LatentNormalizerTest, IdentityAndInverse) {
  const LatentNormalizer id = LatentNormalizer::identity(3);
  EXPECT_EQ(id.normalize(Vector{0.1, 0.2, 0.3}), (Vector{0.1, 0.2, 0.3}));
  const LatentNormalizer n(Vector{-1.0, 0.0}, Vector{1.0, 4.0});
  EXPECT_EQ(n.normalize(Vector{0.0, 1.0}), (Vector{0.5, 0.25}));
  EXPECT_EQ(n.denormalize(Vector{0.5, 0.25}), (Vector{0.0, 1.0}));
  EXPECT_THROW(LatentNormalizer(Vector{0.0}, Vector{0.0}), ContractViolation);
}

TEST(ManifestIoTest, RoundTrip) {
  RunManifest m;
  m.method = "image_hsja";
  m.suite_path = "suite.json";
  m.suite_fingerprint = 123456789012345ull;
  m.src_class = Label{3};
  m.src_index = 4;
  m.trg_class = Label{5};
  m.trg_index = 6;
  m.config.max_queries = 777;
  m.normalization = LatentNormalizer(Vector{0.1, 0.2}, Vector{0.9, 1.3});
  m.oracle_ids = {{"classifier", "c"}};
  m.terminal = "budget_exhausted";
  m.metrics = {{"sim", 0.123456789}};
  const std::string text = manifest_to_json(m);
  const RunManifest back = manifest_from_json(text);
  EXPECT_EQ(manifest_to_json(back), text);
  EXPECT_EQ(back.src_class, m.src_class);
  EXPECT_EQ(back.normalization->high(), m.normalization->high());
  EXPECT_EQ(back.metrics.at("sim"), 0.123456789);
}

}  // namespace
}  // namespace lhsja
