#pragma once

#include <string>

#include <json.hpp>

#include "stx/annealer.hpp"

namespace stx {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// One explanation as a JSON document: target_event, event_ids, objective,
/// fid_plus, fid_minus, delta_fid, alpha_fid, sparsity, size, stage_count,
/// lambda, seed, candidate_count, saturated and, if requested, trace.
nlohmann::ordered_json explanation_document(EventId target, const ExplainResult& result, const SearchConfig& config,
                                            bool include_trace);

nlohmann::ordered_json trace_document(const SearchTrace& trace);

}  // namespace stx
