#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stx/metrics.hpp"
#include "stx/random.hpp"

namespace stx {

/// Proposal probabilities for the size-changing stage.
struct MoveMix {
  double remove = 0.4;
  double add = 0.2;
  double swap = 0.4;
};

struct SearchConfig {
  std::size_t size = 20;  // initial explanation size; fixed in stages 1-2
  int stages = 3;
  int iterations_per_stage = 500;
  double t0 = 1.0;
  double cooling = 0.99;
  double lambda = 0.1;
  std::uint64_t seed = 0;
  MoveMix stage3_move_mix;

  void validate() const;
};

/// Weights used by stage 1, 2 or 3 of the search.
ObjectiveWeights stage_weights(int stage, double lambda);

struct Explanation {
  std::vector<EventId> event_ids;  // ascending
  double objective_value = 0.0;
  FidelityReport report;
  int stage = 1;
};

struct TraceRecord {
  int stage = 1;
  int iteration = 0;
  double temperature = 0.0;
  double proposed_objective = 0.0;
  bool accepted = false;
  std::size_t size = 0;  // explanation size after the accept/reject decision
};

using SearchTrace = std::vector<TraceRecord>;

struct StageResult {
  Explanation best;
  SearchTrace trace;
};

struct ExplainResult {
  Explanation explanation;
  std::vector<Explanation> stage_bests;  // one per stage that ran
  SearchTrace trace;
  std::size_t candidate_count = 0;
  // Set when the computation graph had fewer candidates than the requested size.
  bool saturated = false;
};

/// Uniform random subset of exactly `size` candidates.
std::vector<EventId> initial_solution(const ComputationGraph& cg, std::size_t size, Rng& rng);

/// 1 if the proposal is not worse, otherwise exp(-|l_new - l_old| / T).
double accept_probability(double l_new, double l_old, double temperature);

enum class MoveKind { Remove, Add, Swap };

/// Explanation being searched, stored as positions into the candidate list.
/// Member and non-member lists support O(1) random picks and updates.
class SubsetState {
 public:
  SubsetState(std::size_t candidate_count, std::span<const std::size_t> members);

  [[nodiscard]] std::size_t size() const { return members_.size(); }
  [[nodiscard]] std::size_t excluded() const { return outside_.size(); }
  [[nodiscard]] std::span<const std::size_t> members() const { return members_; }
  [[nodiscard]] std::span<const std::size_t> outside() const { return outside_; }
  [[nodiscard]] bool contains(std::size_t position) const { return slot_[position].inside; }

  void insert(std::size_t position);
  void erase(std::size_t position);

 private:
  struct Slot {
    bool inside = false;
    std::size_t index = 0;
  };
  std::vector<std::size_t> members_;
  std::vector<std::size_t> outside_;
  std::vector<Slot> slot_;
};

struct Move {
  MoveKind kind = MoveKind::Swap;
  std::optional<std::size_t> removed;  // candidate position leaving the explanation
  std::optional<std::size_t> added;    // candidate position joining it
};

/// Draws a perturbation of `state`. Stages 1-2 always swap; stage 3 samples
/// from `mix` after dropping infeasible move kinds. Returns nullopt when no
/// move is feasible at all.
std::optional<Move> draw_move(const SubsetState& state, int stage, Rng& rng, const MoveMix& mix);
void apply_move(SubsetState& state, const Move& move);
void undo_move(SubsetState& state, const Move& move);

/// Set-level convenience over draw_move: returns the perturbed subset
/// (ascending ids), or `current` unchanged if nothing is feasible.
std::vector<EventId> propose_move(std::span<const EventId> current, const ComputationGraph& cg, int stage, Rng& rng,
                                  const MoveMix& mix = {});

/// One annealing stage starting from `init` with temperature config.t0.
/// Returns the best solution visited, not the last accepted one.
StageResult run_stage(const FidelityEvaluator& evaluator, const ObjectiveWeights& weights, int stage,
                      const SearchConfig& config, std::span<const EventId> init, Rng& rng);

/// Full staged search: fidelity only, then alpha-fidelity, then sparsity.
/// Each stage starts from the previous stage's best and resets the temperature.
ExplainResult explain(const FidelityEvaluator& evaluator, const SearchConfig& config);
ExplainResult explain(const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg,
                      const SearchConfig& config);

}  // namespace stx
