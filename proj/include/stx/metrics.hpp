#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stx/model_oracle.hpp"
#include "stx/temporal_graph.hpp"

namespace stx {

/// Floor applied to Fidelity- in the alpha-fidelity denominator.
inline constexpr double kAlphaFidelityFloor = 1e-8;
/// Upper bound on alpha-fidelity.
inline constexpr double kAlphaFidelityCap = 1e8;

struct ObjectiveWeights {
  double epsilon = 1.0;
  double gamma = 0.0;
  double lambda = 0.0;

  void validate() const;
  [[nodiscard]] bool needs_complement() const { return gamma > 0.0; }
};

struct FidelityReport {
  double fid_plus = 0.0;
  double fid_minus = 0.0;
  double delta_fid = 0.0;
  double alpha_fid = 0.0;
  double sparsity = 0.0;
  // Absolute error of the explanation's prediction against the reference;
  // numerically the same quantity as fid_minus.
  double error = 0.0;
};

double delta_fidelity(double fid_plus, double fid_minus);
/// fid_plus / max(fid_minus, floor), clamped to the cap.
double alpha_fidelity(double fid_plus, double fid_minus);
/// 1 - explanation_size / graph_size. Throws if graph_size == 0 or the
/// explanation is larger than the graph.
double sparsity(std::size_t explanation_size, std::size_t graph_size);

FidelityReport make_report(double fid_plus, double fid_minus, std::size_t explanation_size, std::size_t graph_size);

/// error*epsilon - alpha*gamma - sparsity*lambda; lower is better.
double objective(const FidelityReport& report, const ObjectiveWeights& weights);

/// Scores explanations of one target against the cached reference prediction
/// on the full computation graph.
///
/// Every query validates the subset against the candidate set and sorts it,
/// so callers may pass ids in any order.
class FidelityEvaluator {
 public:
  FidelityEvaluator(const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg);

  [[nodiscard]] const Prediction& reference() const { return reference_; }
  [[nodiscard]] const ComputationGraph& graph() const { return cg_; }
  [[nodiscard]] const ModelOracle& oracle() const { return oracle_; }
  [[nodiscard]] const EventStore& store() const { return store_; }

  [[nodiscard]] Prediction predict(std::span<const EventId> included) const;

  /// Distance between the reference and the prediction on `explanation` alone.
  [[nodiscard]] double fidelity_minus(std::span<const EventId> explanation) const;
  /// Distance between the reference and the prediction with `explanation` removed.
  [[nodiscard]] double fidelity_plus(std::span<const EventId> explanation) const;
  [[nodiscard]] FidelityReport report(std::span<const EventId> explanation) const;

  /// Candidates not in `explanation`, ascending by id.
  [[nodiscard]] std::vector<EventId> complement(std::span<const EventId> explanation) const;
  /// Sorted copy of `explanation`; throws InvalidArgument on duplicates or
  /// ids outside the candidate set.
  [[nodiscard]] std::vector<EventId> canonical(std::span<const EventId> explanation) const;

 private:
  const ModelOracle& oracle_;
  const EventStore& store_;
  ComputationGraph cg_;
  std::vector<EventId> sorted_candidates_;
  Prediction reference_;
};

double fidelity_minus(const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg,
                      std::span<const EventId> explanation);
double fidelity_plus(const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg,
                     std::span<const EventId> explanation);

}  // namespace stx
