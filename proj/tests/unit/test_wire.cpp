#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "lhsja/errors.hpp"
#include "lhsja/random.hpp"
#include "lhsja/wire.hpp"

namespace lhsja::wire {
namespace {

std::uint32_t bits(float f) {
  std::uint32_t u = 0;
  std::memcpy(&u, &f, sizeof u);
  return u;
}

TEST(WireTest, ClassifyOfFourDimsIsOneLine) {
  const Request req{Op::kClassify, 7, {0.25f, 0.5f, 0.75f, 1.0f}};
  const std::string frame = encode_request(req);
  ASSERT_FALSE(frame.empty());
  EXPECT_EQ(frame.back(), '\n');
  EXPECT_EQ(frame.find('\n'), frame.size() - 1);
  EXPECT_EQ(decode_request(frame), req);

  Response resp;
  resp.id = 7;
  resp.ok = true;
  resp.label = 3;
  resp.confidence = 0.875f;
  const std::string rframe = encode_response(resp);
  EXPECT_EQ(rframe.find('\n'), rframe.size() - 1);
  EXPECT_EQ(decode_response(rframe), resp);
}

TEST(WireTest, DoublesTravelAsTheirFloatRounding) {
  RngStream rng(RngSeed{1});
  std::vector<double> originals;
  for (int i = 0; i < 2000; ++i) originals.push_back((rng.uniform() - 0.5) * std::pow(10.0, rng.below(20) - 10.0));
  originals.push_back(0.1);
  originals.push_back(1.0 / 3.0);
  originals.push_back(-0.0);
  originals.push_back(static_cast<double>(std::numeric_limits<float>::denorm_min()));
  originals.push_back(static_cast<double>(std::numeric_limits<float>::max()));
  const std::vector<float> sent = to_floats(Vector(originals));
  const Request back = decode_request(encode_request({Op::kEmbed, 1, sent}));
  ASSERT_EQ(back.payload.size(), originals.size());
  for (std::size_t i = 0; i < originals.size(); ++i) {
    EXPECT_EQ(bits(back.payload[i]), bits(static_cast<float>(originals[i]))) << originals[i];
  }
}

TEST(WireTest, InfoRoundTrip) {
  Response r;
  r.id = 0;
  r.ok = true;
  r.info = Info{10, 256, 32, 256, 128, true, true, BoundsBox{-1.0, 1.0}};
  EXPECT_EQ(decode_response(encode_response(r)), r);
}

TEST(WireTest, InfoWithoutBoundsDefaultsToUnitBox) {
  const Response r = decode_response(
      R"({"id":0,"ok":true,"num_classes":2,"input_dim":4,"latent_dim":0,"image_dim":0,"embed_dim":0,)"
      R"("concurrent":false,"deterministic":true})");
  ASSERT_TRUE(r.info.has_value());
  EXPECT_EQ(r.info->latent_bounds, BoundsBox(0.0, 1.0));
  EXPECT_EQ(r.info->input_dim, 4u);
}

TEST(WireTest, ErrorResponseRoundTrip) {
  const Response e = error_response(9, "classify expects dim 4, got 3");
  EXPECT_FALSE(e.ok);
  EXPECT_EQ(decode_response(encode_response(e)), e);
}

TEST(WireTest, MalformedFrameReportsOffset) {
  const std::string bad = R"({"op":"classify","id":1,"payload":[0.1,,0.2]})";
  try {
    decode_request(bad);
    FAIL() << "expected ProtocolError";
  } catch (const ProtocolError& e) {
    // The parser stops at the second comma.
    EXPECT_GE(e.offset(), bad.find(",,"));
    EXPECT_LE(e.offset(), bad.find(",,") + 2);
  }
}

TEST(WireTest, StructurallyInvalidFramesThrow) {
  EXPECT_THROW(decode_request(R"({"op":"fly","id":1,"payload":[]})"), ProtocolError);
  EXPECT_THROW(decode_request(R"({"op":"classify","payload":[]})"), ProtocolError);
  EXPECT_THROW(decode_request(R"({"op":"classify","id":1,"payload":["x"]})"), ProtocolError);
  EXPECT_THROW(decode_request("[1,2]"), ProtocolError);
  EXPECT_THROW(decode_response(R"({"ok":true})"), ProtocolError);
}

TEST(WireTest, OversizedFrameThrows) {
  const std::string frame = encode_request({Op::kClassify, 1, std::vector<float>(1000, 0.123456f)});
  try {
    decode_request(frame, 64);
    FAIL() << "expected ProtocolError";
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.offset(), 64u);
  }
  EXPECT_NO_THROW(decode_request(frame, frame.size()));
}

TEST(WireTest, OpNamesRoundTrip) {
  for (Op op : {Op::kClassify, Op::kGenerate, Op::kEncode, Op::kEmbed, Op::kInfo}) {
    EXPECT_EQ(op_from_string(to_string(op)), op);
  }
  EXPECT_THROW(op_from_string("bogus"), ProtocolError);
}

}  // namespace
}  // namespace lhsja::wire
