#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stx/annealer.hpp"
#include "stx/model_oracle.hpp"
#include "stx/temporal_graph.hpp"

namespace stx {

struct PlantedPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double weight = 0.0;
};

/// Recipe for a synthetic dataset with known influential events. Indices
/// refer to the generated events, which receive ids 0..n_events-1; the
/// target gets id n_events.
struct PlantedSpec {
  std::size_t n_nodes = 20;
  std::size_t n_events = 100;
  std::vector<std::pair<std::size_t, double>> singletons;  // (event index, weight)
  std::vector<PlantedPair> pairs;
  double tau = 50.0;
  double bias = 0.1;
  double noise_scale = 0.0;
  std::size_t attribute_dim = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draws a spec with `n_singletons` singletons and `n_pairs` pairs on
/// pairwise-distinct events. Weights are uniform in [0.5, 1.5] and tau is
/// half the event count, so decay factors stay within [e^-2, 1].
PlantedSpec random_planted_spec(std::size_t n_events, std::size_t n_nodes, std::size_t n_singletons,
                                std::size_t n_pairs, double noise_scale, std::uint64_t seed);

struct GroundTruth {
  std::vector<EventId> important_ids;  // ascending
};

struct PlantedTerm {
  EventId id = 0;
  double weight = 0.0;
};

struct PlantedPairTerm {
  EventId first = 0;
  EventId second = 0;
  double weight = 0.0;
};

/// Everything needed to evaluate the planted model on a dataset. This is
/// what the ground-truth sidecar file stores.
struct PlantedModel {
  EventId target = 0;
  double bias = 0.0;
  double tau = 1.0;
  double noise_scale = 0.0;
  std::vector<PlantedTerm> singletons;  // ascending id
  std::vector<PlantedPairTerm> pairs;
  std::vector<PlantedTerm> noise;  // ascending id; zero entries omitted

  [[nodiscard]] GroundTruth ground_truth() const;
  [[nodiscard]] nlohmann::ordered_json to_json() const;
  static PlantedModel from_json(const nlohmann::json& j);
};

struct SyntheticInstance {
  EventStore store;
  EventId target = 0;
  GroundTruth truth;
  PlantedModel model;
};

/// Generates events that all lie within two hops of the target's nodes and
/// strictly before it, so the 2-hop computation graph holds every event.
SyntheticInstance generate(const PlantedSpec& spec);

/// b + sum of decayed singleton weights + decayed pair weights where both
/// members are present + fixed noise of included events. Insensitive to the
/// order of `included`.
double planted_value(const PlantedModel& model, const EventStore& store, std::span<const EventId> included,
                     double t_k);
Prediction planted_predict(const PlantedModel& model, const EventStore& store, std::span<const EventId> included,
                           double t_k);

/// Closed-form planted model exposed as an entity-regression (D=1) oracle.
class PlantedOracle final : public ModelOracle {
 public:
  explicit PlantedOracle(PlantedModel model) : model_(std::move(model)) {}

  [[nodiscard]] TaskSpec task() const override { return TaskSpec::entity_regression(1); }
  [[nodiscard]] bool reentrant() const override { return true; }
  [[nodiscard]] Prediction predict(const EventStore& store, std::span<const EventId> included,
                                   EventId target) const override;
  [[nodiscard]] const PlantedModel& model() const { return model_; }

 private:
  PlantedModel model_;
};

struct RecoveryScore {
  double precision = 0.0;
  double recall = 0.0;
};

RecoveryScore recovery_score(std::span<const EventId> explanation, const GroundTruth& truth);
inline RecoveryScore recovery_score(const Explanation& explanation, const GroundTruth& truth) {
  return recovery_score(explanation.event_ids, truth);
}

/// Writes the store in events-jsonl format, one event per line in store order.
void write_events_jsonl(std::ostream& out, const EventStore& store);
void write_ground_truth(std::ostream& out, const PlantedModel& model);
PlantedModel read_ground_truth(const std::filesystem::path& path);

}  // namespace stx
