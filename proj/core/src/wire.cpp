#include "lhsja/wire.hpp"

#include <json.hpp>

#include "lhsja/errors.hpp"

namespace lhsja::wire {

namespace {

// Numbers stored as 32-bit floats: parsed with strtof, dumped as the
// shortest decimal that round-trips a float.
using WireJson = nlohmann::basic_json<std::map, std::vector, std::string, bool, std::int64_t, std::uint64_t, float>;

WireJson parse_frame(std::string_view frame, std::size_t max_frame) {
  if (frame.size() > max_frame) {
    throw ProtocolError("frame exceeds maximum size of " + std::to_string(max_frame) + " bytes", max_frame);
  }
  if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
  try {
    WireJson j = WireJson::parse(frame.begin(), frame.end());
    if (!j.is_object()) throw ProtocolError("frame is not a JSON object", 0);
    return j;
  } catch (const WireJson::parse_error& e) {
    throw ProtocolError(std::string("malformed frame: ") + e.what(), e.byte);
  }
}

std::vector<float> payload_from(const WireJson& j) {
  if (!j.is_array()) throw ProtocolError("payload must be an array", 0);
  std::vector<float> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ProtocolError("payload entries must be numbers", 0);
    out.push_back(v.get<float>());
  }
  return out;
}

}  // namespace

std::string to_string(Op op) {
  switch (op) {
    case Op::kClassify: return "classify";
    case Op::kGenerate: return "generate";
    case Op::kEncode: return "encode";
    case Op::kEmbed: return "embed";
    case Op::kInfo: return "info";
  }
  return "unknown";
}

Op op_from_string(std::string_view s) {
  if (s == "classify") return Op::kClassify;
  if (s == "generate") return Op::kGenerate;
  if (s == "encode") return Op::kEncode;
  if (s == "embed") return Op::kEmbed;
  if (s == "info") return Op::kInfo;
  throw ProtocolError("unknown op '" + std::string(s) + "'", 0);
}

std::string encode_request(const Request& r) {
  WireJson j = {{"op", to_string(r.op)}, {"id", r.id}};
  if (r.op != Op::kInfo) j["payload"] = r.payload;
  return j.dump() + "\n";
}

std::string encode_response(const Response& r) {
  WireJson j = {{"id", r.id}, {"ok", r.ok}};
  if (r.label) j["label"] = *r.label;
  if (r.confidence) j["confidence"] = *r.confidence;
  if (r.payload) j["payload"] = *r.payload;
  if (r.error) j["error"] = *r.error;
  if (r.info) {
    const Info& i = *r.info;
    j["num_classes"] = i.num_classes;
    j["input_dim"] = i.input_dim;
    j["latent_dim"] = i.latent_dim;
    j["image_dim"] = i.image_dim;
    j["embed_dim"] = i.embed_dim;
    j["concurrent"] = i.concurrent;
    j["deterministic"] = i.deterministic;
    j["latent_bounds"] = {static_cast<float>(i.latent_bounds.low), static_cast<float>(i.latent_bounds.high)};
  }
  return j.dump() + "\n";
}

Request decode_request(std::string_view frame, std::size_t max_frame) {
  const WireJson j = parse_frame(frame, max_frame);
  try {
    Request r;
    r.op = op_from_string(j.at("op").get<std::string>());
    r.id = j.at("id").get<std::uint64_t>();
    if (r.op != Op::kInfo) r.payload = payload_from(j.at("payload"));
    return r;
  } catch (const WireJson::exception& e) {
    throw ProtocolError(std::string("bad request frame: ") + e.what(), 0);
  }
}

Response decode_response(std::string_view frame, std::size_t max_frame) {
  const WireJson j = parse_frame(frame, max_frame);
  try {
    Response r;
    r.id = j.at("id").get<std::uint64_t>();
    r.ok = j.at("ok").get<bool>();
    if (j.contains("label")) r.label = j.at("label").get<std::uint32_t>();
    if (j.contains("confidence")) r.confidence = j.at("confidence").get<float>();
    if (j.contains("payload")) r.payload = payload_from(j.at("payload"));
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    if (j.contains("num_classes")) {
      Info i;
      i.num_classes = j.at("num_classes").get<std::uint32_t>();
      i.input_dim = j.value("input_dim", 0u);
      i.latent_dim = j.value("latent_dim", 0u);
      i.image_dim = j.value("image_dim", 0u);
      i.embed_dim = j.value("embed_dim", 0u);
      i.concurrent = j.value("concurrent", false);
      i.deterministic = j.value("deterministic", false);
      if (j.contains("latent_bounds")) {
        i.latent_bounds = BoundsBox(j.at("latent_bounds").at(0).get<float>(), j.at("latent_bounds").at(1).get<float>());
      }
      r.info = i;
    }
    return r;
  } catch (const WireJson::exception& e) {
    throw ProtocolError(std::string("bad response frame: ") + e.what(), 0);
  } catch (const ContractViolation& e) {
    throw ProtocolError(std::string("bad response frame: ") + e.what(), 0);
  }
}

Response error_response(std::uint64_t id, std::string message) {
  Response r;
  r.id = id;
  r.ok = false;
  r.error = std::move(message);
  return r;
}

}  // namespace lhsja::wire
