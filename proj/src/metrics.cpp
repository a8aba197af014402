#include "stx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stx/error.hpp"

namespace stx {

void ObjectiveWeights::validate() const {
  if (!(epsilon >= 0.0) || !(gamma >= 0.0)) throw InvalidArgument("objective weights must be non-negative");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  if (epsilon == 0.0 && gamma == 0.0 && lambda == 0.0)
    throw InvalidArgument("at least one objective weight must be positive");
}

double delta_fidelity(double fid_plus, double fid_minus) { return fid_plus - fid_minus; }

double alpha_fidelity(double fid_plus, double fid_minus) {
  const double ratio = fid_plus / std::max(fid_minus, kAlphaFidelityFloor);
  return std::min(ratio, kAlphaFidelityCap);
}

double sparsity(std::size_t explanation_size, std::size_t graph_size) {
  if (graph_size == 0) throw InvalidArgument("sparsity of an empty computation graph is undefined");
  if (explanation_size > graph_size) throw InvalidArgument("explanation is larger than the computation graph");
  return 1.0 - static_cast<double>(explanation_size) / static_cast<double>(graph_size);
}

FidelityReport make_report(double fid_plus, double fid_minus, std::size_t explanation_size, std::size_t graph_size) {
  FidelityReport r;
  r.fid_plus = fid_plus;
  r.fid_minus = fid_minus;
  r.delta_fid = delta_fidelity(fid_plus, fid_minus);
  r.alpha_fid = alpha_fidelity(fid_plus, fid_minus);
  r.sparsity = sparsity(explanation_size, graph_size);
  r.error = fid_minus;
  return r;
}

double objective(const FidelityReport& report, const ObjectiveWeights& weights) {
  double value = weights.epsilon * report.error;
  if (weights.gamma != 0.0) value -= weights.gamma * report.alpha_fid;
  if (weights.lambda != 0.0) value -= weights.lambda * report.sparsity;
  return value;
}

FidelityEvaluator::FidelityEvaluator(const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg)
    : oracle_(oracle), store_(store), cg_(cg), sorted_candidates_(cg.candidate_ids) {
  std::sort(sorted_candidates_.begin(), sorted_candidates_.end());
  reference_ = checked_predict(oracle_, store_, sorted_candidates_, cg_.target_event_id);
}

Prediction FidelityEvaluator::predict(std::span<const EventId> included) const {
  const auto ids = canonical(included);
  return checked_predict(oracle_, store_, ids, cg_.target_event_id);
}

std::vector<EventId> FidelityEvaluator::canonical(std::span<const EventId> explanation) const {
  std::vector<EventId> ids(explanation.begin(), explanation.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw InvalidArgument("explanation contains duplicate event ids");
  for (EventId id : ids) {
    if (!std::binary_search(sorted_candidates_.begin(), sorted_candidates_.end(), id))
      throw InvalidArgument("event " + std::to_string(id) + " is not in the computation graph");
  }
  return ids;
}

std::vector<EventId> FidelityEvaluator::complement(std::span<const EventId> explanation) const {
  const auto ids = canonical(explanation);
  std::vector<EventId> out;
  out.reserve(sorted_candidates_.size() - ids.size());
  std::set_difference(sorted_candidates_.begin(), sorted_candidates_.end(), ids.begin(), ids.end(),
                      std::back_inserter(out));
  return out;
}

double FidelityEvaluator::fidelity_minus(std::span<const EventId> explanation) const {
  return prediction_distance(reference_, predict(explanation));
}

double FidelityEvaluator::fidelity_plus(std::span<const EventId> explanation) const {
  const auto rest = complement(explanation);
  return prediction_distance(reference_, checked_predict(oracle_, store_, rest, cg_.target_event_id));
}

FidelityReport FidelityEvaluator::report(std::span<const EventId> explanation) const {
  return make_report(fidelity_plus(explanation), fidelity_minus(explanation), explanation.size(), cg_.size());
}

double fidelity_minus(const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg,
                      std::span<const EventId> explanation) {
  return FidelityEvaluator(oracle, store, cg).fidelity_minus(explanation);
}

double fidelity_plus(const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg,
                     std::span<const EventId> explanation) {
  return FidelityEvaluator(oracle, store, cg).fidelity_plus(explanation);
}

}  // namespace stx
