#ifndef LHSJA_WIRE_HPP
#define LHSJA_WIRE_HPP

// Oracle wire protocol: one JSON object per line over TCP. Payload values
// are 32-bit reals written in their shortest round-trip decimal form, so a
// value survives encode/decode bit-exactly. See docs/wire_protocol.md.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lhsja/vector.hpp"

namespace lhsja::wire {

inline constexpr std::size_t kDefaultMaxFrame = 16u << 20;

enum class Op { kClassify, kGenerate, kEncode, kEmbed, kInfo };

std::string to_string(Op op);
Op op_from_string(std::string_view s);

struct Request {
  Op op = Op::kInfo;
  std::uint64_t id = 0;
  std::vector<float> payload;

  bool operator==(const Request&) const = default;
};

/// Capabilities advertised by a server. A zero dim means the op is absent.
struct Info {
  std::uint32_t num_classes = 0;
  std::uint32_t input_dim = 0;
  std::uint32_t latent_dim = 0;
  std::uint32_t image_dim = 0;
  std::uint32_t embed_dim = 0;
  bool concurrent = false;
  bool deterministic = false;
  /// Optional generator latent box; [0, 1] when the server omits it.
  BoundsBox latent_bounds{0.0, 1.0};

  bool operator==(const Info&) const = default;
};

struct Response {
  std::uint64_t id = 0;
  bool ok = false;
  std::optional<std::uint32_t> label;
  std::optional<float> confidence;
  std::optional<std::vector<float>> payload;
  std::optional<std::string> error;
  std::optional<Info> info;

  bool operator==(const Response&) const = default;
};

/// Each encoder returns a single line terminated by '\n'.
std::string encode_request(const Request& r);
std::string encode_response(const Response& r);

/// Decoders accept a frame with or without its trailing newline. Malformed
/// input raises ProtocolError carrying the byte offset of the fault, and so
/// does a frame longer than `max_frame`.
Request decode_request(std::string_view frame, std::size_t max_frame = kDefaultMaxFrame);
Response decode_response(std::string_view frame, std::size_t max_frame = kDefaultMaxFrame);

/// Error response for request `id`.
Response error_response(std::uint64_t id, std::string message);

}  // namespace lhsja::wire

#endif  // LHSJA_WIRE_HPP
