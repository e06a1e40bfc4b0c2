#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "lhsja/errors.hpp"
#include "lhsja/metrics.hpp"
#include "lhsja/oracle_server.hpp"
#include "lhsja/remote.hpp"
#include "lhsja/synthetic.hpp"
#include "support.hpp"

namespace lhsja::remote {
namespace {

/// Uniform probe with coordinates already representable as 32-bit reals.
Vector float_probe(std::size_t dim, RngStream& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = static_cast<double>(static_cast<float>(rng.uniform()));
  return Vector(std::move(v));
}

class RemoteTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SuiteParams p;
    p.latent_dim = 8;
    p.image_dim = 48;
    p.num_classes = 6;
    p.samples_per_class = 2;
    p.intra_radius = 0.1;
    suite_ = new SyntheticSuite(make_suite(p));
  }
  static void TearDownTestSuite() { delete suite_; }

  static OracleSet served() {
    OracleSet o = suite_->oracles();
    o.embedder = std::make_shared<ProjectionEmbedder>(suite_->params.image_dim, 16);
    return o;
  }
  static SyntheticSuite* suite_;
};
SyntheticSuite* RemoteTest::suite_ = nullptr;

TEST_F(RemoteTest, HandshakeReportsServedDims) {
  OracleServer server(served());
  server.start();
  const RemoteOracleSet remote = connect(server.address());
  const wire::Info& info = remote.info();
  EXPECT_EQ(info, server.info());
  EXPECT_EQ(info.num_classes, 6u);
  EXPECT_EQ(info.input_dim, 48u);
  EXPECT_EQ(info.latent_dim, 8u);
  EXPECT_EQ(info.image_dim, 48u);
  EXPECT_EQ(info.embed_dim, 16u);
  EXPECT_TRUE(info.deterministic);
  EXPECT_FALSE(info.concurrent);
  EXPECT_EQ(server.evaluations(), 0u);
}

TEST_F(RemoteTest, ViewsMatchInProcessOracles) {
  OracleServer server(served());
  server.start();
  const RemoteOracleSet remote = connect(server.address());
  const OracleSet local = served();
  RngStream rng(RngSeed{3});
  for (int i = 0; i < 200; ++i) {
    const Vector x = float_probe(48, rng);
    EXPECT_EQ(remote.classifier()->classify(x).label, local.classifier->classify(x).label);
  }
  const Vector w = float_probe(8, rng);
  const Vector gx = remote.generator()->generate(w);
  const auto expected = to_floats(local.generator->generate(w));
  ASSERT_EQ(gx.dim(), expected.size());
  for (std::size_t i = 0; i < gx.dim(); ++i) EXPECT_EQ(gx[i], static_cast<double>(expected[i]));
  EXPECT_EQ(remote.encoder()->latent_dim(), 8u);
  EXPECT_EQ(remote.embedder()->embed_dim(), 16u);
  EXPECT_EQ(remote.generator()->latent_bounds(), local.generator->latent_bounds());
}

TEST_F(RemoteTest, MismatchedResponseIdIsProtocolError) {
  ServerOptions opt;
  opt.id_skew = 1000;
  OracleServer server(served(), opt);
  server.start();
  const RemoteOracleSet remote = connect(server.address());
  const std::vector<float> x(48, 0.5f);
  EXPECT_THROW(remote.connection()->call(wire::Op::kClassify, x), ProtocolError);
}

TEST_F(RemoteTest, RepeatedCallsAgree) {
  OracleServer server(served());
  server.start();
  const RemoteOracleSet remote = connect(server.address());
  RngStream rng(RngSeed{4});
  const DeterminismReport r = probe_determinism(*remote.classifier(), float_probe(48, rng), 100);
  EXPECT_EQ(r.calls, 100u);
  EXPECT_EQ(r.distinct_labels, 1u);
  EXPECT_TRUE(r.consistent);
  EXPECT_EQ(server.classify_evaluations(), 100u);
}

TEST_F(RemoteTest, PipelinedRequestsAreDemultiplexed) {
  ServerOptions opt;
  opt.concurrent = true;
  opt.workers = 4;
  opt.jitter = std::chrono::microseconds(2000);
  OracleServer server(served(), opt);
  server.start();
  const RemoteOracleSet remote = connect(server.address());
  ASSERT_TRUE(remote.info().concurrent);
  const auto classifier = remote.classifier();
  ASSERT_TRUE(classifier->concurrent());

  RngStream rng(RngSeed{5});
  std::vector<Vector> probes;
  for (int i = 0; i < 32; ++i) probes.push_back(float_probe(48, rng));
  std::vector<std::future<Label>> answers;
  for (const Vector& x : probes) {
    answers.push_back(std::async(std::launch::async, [&classifier, &x] { return classifier->classify(x).label; }));
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    EXPECT_EQ(answers[i].get(), suite_->classifier->classify(probes[i]).label) << i;
  }
  EXPECT_EQ(server.classify_evaluations(), 32u);
}

TEST_F(RemoteTest, ResentRequestsAreChargedOnce) {
  ServerOptions opt;
  opt.drop_first_response_every = 3;
  OracleServer server(served(), opt);
  server.start();
  ClientOptions copt;
  copt.timeout = std::chrono::milliseconds(100);
  copt.max_retries = 3;
  const RemoteOracleSet remote = connect(server.address(), copt);
  const auto classifier = remote.classifier();

  QueryLedger ledger;
  RngStream rng(RngSeed{6});
  const DecisionFn d = DecisionFn::targeted(Label{1});
  for (int i = 0; i < 30; ++i) {
    const Vector x = float_probe(48, rng);
    EXPECT_EQ(decide(d, *classifier, ledger, x), d.accepts(suite_->classifier->classify(x).label));
  }
  EXPECT_EQ(ledger.classify_count(), 30u);
  EXPECT_GT(remote.connection()->resends(), 0u);
  EXPECT_GT(server.dropped(), 0u);
  // Every id was evaluated once; resends were answered from the cache.
  EXPECT_EQ(server.classify_evaluations(), 30u);
  EXPECT_EQ(server.duplicates(), remote.connection()->resends());
  EXPECT_EQ(remote.connection()->requests(), 31u);  // plus the handshake
}

TEST_F(RemoteTest, ConnectionRefusedIsUnreachable) {
  std::string address;
  {
    OracleServer server(served());
    server.start();
    address = server.address();
    server.stop();
  }
  EXPECT_THROW(connect(address), OracleUnreachable);
  EXPECT_THROW(connect("not an address"), ContractViolation);
}

TEST_F(RemoteTest, NondeterministicServerIsRefusedForAttacks) {
  ServerOptions opt;
  opt.deterministic = false;
  OracleServer server(served(), opt);
  server.start();
  const RemoteOracleSet strict = connect(server.address());
  EXPECT_THROW(strict.classifier(), ContractViolation);
  EXPECT_THROW(strict.oracles(), ContractViolation);
  EXPECT_NE(strict.probe_classifier(), nullptr);

  ClientOptions lenient;
  lenient.allow_nondeterministic = true;
  const RemoteOracleSet relaxed = connect(server.address(), lenient);
  EXPECT_NE(relaxed.classifier(), nullptr);
}

TEST_F(RemoteTest, OversizedResponseIsProtocolError) {
  OracleServer server(served());
  server.start();
  ClientOptions copt;
  copt.max_frame = 256;
  const RemoteOracleSet remote = connect(server.address(), copt);
  // 48 floats in shortest form do not fit in 256 bytes.
  RngStream rng(RngSeed{7});
  EXPECT_THROW(remote.generator()->generate(float_probe(8, rng)), ProtocolError);
}

TEST_F(RemoteTest, WrongPayloadLengthIsRejectedByServer) {
  OracleServer server(served());
  server.start();
  const RemoteOracleSet remote = connect(server.address());
  const std::vector<float> short_payload(47, 0.5f);
  try {
    remote.connection()->call(wire::Op::kClassify, short_payload);
    FAIL() << "expected ContractViolation";
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("expects dim 48"), std::string::npos) << e.what();
  }
  // The session survives the error.
  const std::vector<float> ok_payload(48, 0.5f);
  EXPECT_TRUE(remote.connection()->call(wire::Op::kClassify, ok_payload).ok);
}

TEST_F(RemoteTest, ServerEvaluateNeverThrows) {
  OracleServer server(served());
  EXPECT_FALSE(server.evaluate({wire::Op::kClassify, 1, {0.5f}}).ok);
  EXPECT_TRUE(server.evaluate({wire::Op::kInfo, 0, {}}).ok);
  OracleSet only_classifier{suite_->classifier, nullptr, nullptr, nullptr};
  OracleServer bare(only_classifier);
  EXPECT_FALSE(bare.evaluate({wire::Op::kGenerate, 2, std::vector<float>(8, 0.5f)}).ok);
  EXPECT_EQ(bare.info().latent_dim, 0u);
}

TEST(ProbeDeterminismTest, FlagsInconsistentClassifier) {
  class Flaky final : public ClassifierOracle {
   public:
    Classification classify(const Vector&) const override { return {Label{static_cast<std::uint32_t>(n_++ % 2)}, {}}; }
    std::size_t num_classes() const override { return 2; }
    std::size_t input_dim() const override { return 1; }

   private:
    mutable std::uint32_t n_ = 0;
  };
  const Flaky flaky;
  const DeterminismReport r = probe_determinism(flaky, Vector{0.5}, 10);
  EXPECT_FALSE(r.consistent);
  EXPECT_EQ(r.distinct_labels, 2u);
}

}  // namespace
}  // namespace lhsja::remote
