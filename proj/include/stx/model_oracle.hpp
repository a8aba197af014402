#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stx/temporal_graph.hpp"

namespace stx {

enum class TaskKind {
  EntityBinary,
  EntityMulticlass,
  GraphMulticlass,
  EntityRegression,
  GraphRegression,
};

/// Prediction task of a model. `width` is the number of classes (C) or
/// regression outputs (D); always 1 for binary classification.
struct TaskSpec {
  TaskKind kind = TaskKind::EntityBinary;
  std::size_t width = 1;

  static TaskSpec entity_binary() { return {TaskKind::EntityBinary, 1}; }
  static TaskSpec entity_multiclass(std::size_t classes);
  static TaskSpec graph_multiclass(std::size_t classes);
  static TaskSpec entity_regression(std::size_t dim);
  static TaskSpec graph_regression(std::size_t dim);

  [[nodiscard]] bool graph_level() const {
    return kind == TaskKind::GraphMulticlass || kind == TaskKind::GraphRegression;
  }
  void validate() const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

std::string task_kind_name(TaskKind kind);
TaskKind parse_task_kind(const std::string& name);

/// Raw (pre-activation) model output for one target.
struct Prediction {
  TaskSpec task;
  std::vector<double> values;
  // Populated for graph-level tasks only: one output vector per node.
  std::vector<std::vector<double>> per_node;

  /// Throws OracleError if the shape or values break the task contract.
  void validate() const;
};

/// Task-aware distance between two predictions of the same task.
///
/// Binary: absolute difference of the explained logit. Multiclass and
/// entity regression: sum of absolute differences over outputs. Graph-level
/// tasks: that per-node sum averaged over nodes.
double prediction_distance(const Prediction& a, const Prediction& b);

/// Black-box model that can be queried on an arbitrary subset of past events.
///
/// `included` is sorted ascending by id. Events outside it are treated as
/// absent from the input graph. Implementations must be deterministic.
class ModelOracle {
 public:
  virtual ~ModelOracle() = default;

  [[nodiscard]] virtual TaskSpec task() const = 0;
  /// Whether predict may be called concurrently from several threads.
  [[nodiscard]] virtual bool reentrant() const = 0;
  [[nodiscard]] virtual Prediction predict(const EventStore& store, std::span<const EventId> included,
                                           EventId target) const = 0;
};

/// Calls the oracle and validates its reply. Any failure, including a
/// malformed reply, is reported as OracleError.
Prediction checked_predict(const ModelOracle& oracle, const EventStore& store, std::span<const EventId> included,
                           EventId target);

/// Oracle backed by a plain callable; handy for tests and language bindings.
class CallbackOracle final : public ModelOracle {
 public:
  using Fn = std::function<std::vector<double>(std::span<const EventId>, EventId)>;

  CallbackOracle(TaskSpec task, Fn fn, bool reentrant = false)
      : task_(task), fn_(std::move(fn)), reentrant_(reentrant) {}

  [[nodiscard]] TaskSpec task() const override { return task_; }
  [[nodiscard]] bool reentrant() const override { return reentrant_; }
  [[nodiscard]] Prediction predict(const EventStore& store, std::span<const EventId> included,
                                   EventId target) const override;

 private:
  TaskSpec task_;
  Fn fn_;
  bool reentrant_;
};

}  // namespace stx
