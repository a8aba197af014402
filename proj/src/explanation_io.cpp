#include "stx/explanation_io.hpp"

#include <charconv>

namespace stx {

using nlohmann::ordered_json;

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

ordered_json trace_document(const SearchTrace& trace) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : trace) {
    rows.push_back(ordered_json{{"stage", r.stage},
                                {"iteration", r.iteration},
                                {"temperature", r.temperature},
                                {"objective", r.proposed_objective},
                                {"accepted", r.accepted},
                                {"size", r.size}});
  }
  return rows;
}

ordered_json explanation_document(EventId target, const ExplainResult& result, const SearchConfig& config,
                                  bool include_trace) {
  const Explanation& e = result.explanation;
  ordered_json doc;
  doc["target_event"] = target;
  doc["event_ids"] = e.event_ids;
  doc["objective"] = e.objective_value;
  doc["fid_plus"] = e.report.fid_plus;
  doc["fid_minus"] = e.report.fid_minus;
  doc["delta_fid"] = e.report.delta_fid;
  doc["alpha_fid"] = e.report.alpha_fid;
  doc["sparsity"] = e.report.sparsity;
  doc["size"] = e.event_ids.size();
  doc["stage_count"] = config.stages;
  doc["lambda"] = config.lambda;
  doc["seed"] = config.seed;
  doc["candidate_count"] = result.candidate_count;
  doc["saturated"] = result.saturated;
  if (include_trace) doc["trace"] = trace_document(result.trace);
  return doc;
}

}  // namespace stx
