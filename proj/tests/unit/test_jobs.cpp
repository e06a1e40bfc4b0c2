#include <gtest/gtest.h>

#include "lhsja/errors.hpp"
#include "lhsja/jobs.hpp"
#include "lhsja/synthetic.hpp"

namespace lhsja {
namespace {

class JobsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SuiteParams p;
    p.latent_dim = 8;
    p.image_dim = 32;
    p.num_classes = 4;
    p.samples_per_class = 3;
    suite_ = new SyntheticSuite(make_suite(p));
  }
  static void TearDownTestSuite() { delete suite_; }

  static RunManifest manifest(const std::string& method) {
    RunManifest m;
    m.method = method;
    m.src_class = Label{0};
    m.trg_class = Label{2};
    m.trg_index = 1;
    m.config.max_queries = 600;
    m.config.seed = RngSeed{5};
    m.calibration_samples = 200;
    return m;
  }
  static SyntheticSuite* suite_;
};
SyntheticSuite* JobsTest::suite_ = nullptr;

TEST_F(JobsTest, ReplayFromWrittenManifestIsIdentical) {
  for (const char* method : {"latent_hsja", "image_hsja"}) {
    const JobOutput first = run_manifest(manifest(method), *suite_);
    EXPECT_EQ(first.manifest.suite_fingerprint, suite_fingerprint(*suite_));
    EXPECT_FALSE(first.manifest.terminal.empty());
    EXPECT_EQ(first.manifest.metrics.at("attack_queries"), static_cast<double>(first.trace.total_queries()));

    // The completed manifest, reread from JSON, reproduces the trace bit for bit.
    const RunManifest reread = manifest_from_json(manifest_to_json(first.manifest));
    const JobOutput second = run_manifest(reread, *suite_);
    EXPECT_EQ(trace_to_json(second.trace), trace_to_json(first.trace)) << method;
    EXPECT_EQ(manifest_to_json(second.manifest), manifest_to_json(first.manifest)) << method;
  }
}

TEST_F(JobsTest, LatentJobStoresNormalization) {
  const JobOutput out = run_manifest(manifest("latent_hsja"), *suite_);
  ASSERT_TRUE(out.manifest.normalization.has_value());
  EXPECT_EQ(out.manifest.normalization->dim(), 8u);
  EXPECT_LE(out.manifest.metrics.at("final_latent_dist"), out.manifest.metrics.at("initial_latent_dist"));
}

TEST_F(JobsTest, RejectsBadManifests) {
  RunManifest m = manifest("latent_hsja");
  m.suite_fingerprint = suite_fingerprint(*suite_) + 1;
  EXPECT_THROW(run_manifest(m, *suite_), ContractViolation);
  m = manifest("latent_hsja");
  m.trg_class = m.src_class;
  EXPECT_THROW(run_manifest(m, *suite_), ContractViolation);
  m = manifest("other");
  EXPECT_THROW(run_manifest(m, *suite_), ContractViolation);
  m = manifest("image_hsja");
  m.src_index = 99;
  EXPECT_THROW(run_manifest(m, *suite_), ContractViolation);
}

}  // namespace
}  // namespace lhsja
