#include <string>

#include "json_util.hpp"
#include "lhsja/errors.hpp"
#include "lhsja/hsja.hpp"

namespace lhsja {

using detail::json;

std::string trace_to_json(const AttackTrace& trace) {
  json records = json::array();
  for (const auto& r : trace.records) {
    json jr = {
        {"t", r.t},
        {"queries_used", r.queries_used},
        {"dist", r.dist},
        {"step_size", r.step_size},
        {"batch_size", r.batch_size},
        {"delta", r.delta},
        {"accepted", r.accepted},
    };
    if (r.iterate) jr["iterate"] = detail::to_json_array(*r.iterate);
    records.push_back(std::move(jr));
  }
  json j = {
      {"initial", detail::to_json_array(trace.initial)},
      {"terminal", to_string(trace.terminal)},
      {"queries",
       {{"verify", trace.queries.verify},
        {"binary_search", trace.queries.binary_search},
        {"gradient", trace.queries.gradient},
        {"step_search", trace.queries.step_search},
        {"total", trace.queries.total()}}},
      {"records", std::move(records)},
  };
  return j.dump(2) + "\n";
}

AttackTrace trace_from_json(const std::string& text) {
  const json j = detail::parse_or_throw(text, "trace_from_json");
  try {
    AttackTrace trace{detail::vector_from_json(j.at("initial"), "trace.initial"), {}, {},
                      terminal_reason_from_string(j.at("terminal").get<std::string>())};
    const json& q = j.at("queries");
    trace.queries = {q.at("verify").get<std::uint64_t>(), q.at("binary_search").get<std::uint64_t>(),
                     q.at("gradient").get<std::uint64_t>(), q.at("step_search").get<std::uint64_t>()};
    for (const json& jr : j.at("records")) {
      IterationRecord r;
      r.t = jr.at("t").get<std::size_t>();
      r.queries_used = jr.at("queries_used").get<std::uint64_t>();
      r.dist = jr.at("dist").get<double>();
      r.step_size = jr.at("step_size").get<double>();
      r.batch_size = jr.at("batch_size").get<std::size_t>();
      r.delta = jr.at("delta").get<double>();
      r.accepted = jr.at("accepted").get<bool>();
      if (jr.contains("iterate")) r.iterate = detail::vector_from_json(jr.at("iterate"), "record.iterate");
      trace.records.push_back(std::move(r));
    }
    return trace;
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("trace_from_json: ") + e.what());
  }
}

}  // namespace lhsja
