#ifndef LHSJA_SRC_JSON_UTIL_HPP
#define LHSJA_SRC_JSON_UTIL_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "lhsja/errors.hpp"
#include "lhsja/vector.hpp"

namespace lhsja::detail {

using nlohmann::json;

inline json to_json_array(const Vector& v) { return json(v.raw()); }

inline Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ContractViolation(std::string(what) + ": expected a numeric array");
  return Vector(j.get<std::vector<double>>());
}

inline json parse_or_throw(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractViolation(std::string(what) + ": " + e.what());
  }
}

}  // namespace lhsja::detail

#endif  // LHSJA_SRC_JSON_UTIL_HPP
