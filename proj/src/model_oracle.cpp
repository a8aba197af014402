#include "stx/model_oracle.hpp"

#include <cmath>

#include "stx/error.hpp"

namespace stx {

namespace {

double abs_sum(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total;
}

void require_width(std::size_t width, const char* what) {
  if (width == 0) throw InvalidArgument(std::string(what) + " must be strictly positive");
}

}  // namespace

TaskSpec TaskSpec::entity_multiclass(std::size_t classes) { return {TaskKind::EntityMulticlass, classes}; }
TaskSpec TaskSpec::graph_multiclass(std::size_t classes) { return {TaskKind::GraphMulticlass, classes}; }
TaskSpec TaskSpec::entity_regression(std::size_t dim) { return {TaskKind::EntityRegression, dim}; }
TaskSpec TaskSpec::graph_regression(std::size_t dim) { return {TaskKind::GraphRegression, dim}; }

void TaskSpec::validate() const {
  switch (kind) {
    case TaskKind::EntityBinary:
      if (width != 1) throw InvalidArgument("binary task must have width 1");
      break;
    case TaskKind::EntityMulticlass:
    case TaskKind::GraphMulticlass:
      if (width < 2) throw InvalidArgument("multiclass task needs at least 2 classes");
      break;
    case TaskKind::EntityRegression:
    case TaskKind::GraphRegression:
      require_width(width, "regression dimension");
      break;
  }
}

std::string task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::EntityBinary: return "entity-binary";
    case TaskKind::EntityMulticlass: return "entity-multiclass";
    case TaskKind::GraphMulticlass: return "graph-multiclass";
    case TaskKind::EntityRegression: return "entity-regression";
    case TaskKind::GraphRegression: return "graph-regression";
  }
  return "unknown";
}

TaskKind parse_task_kind(const std::string& name) {
  for (auto kind : {TaskKind::EntityBinary, TaskKind::EntityMulticlass, TaskKind::GraphMulticlass,
                    TaskKind::EntityRegression, TaskKind::GraphRegression}) {
    if (task_kind_name(kind) == name) return kind;
  }
  throw InvalidArgument("unknown task kind '" + name + "'");
}

void Prediction::validate() const {
  if (values.size() != task.width) {
    throw OracleError("prediction has " + std::to_string(values.size()) + " values, task " +
                      task_kind_name(task.kind) + " expects " + std::to_string(task.width));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw OracleError("prediction contains a non-finite value");
  }
  if (task.graph_level()) {
    if (per_node.empty()) throw OracleError("graph-level prediction carries no per-node outputs");
    for (const auto& row : per_node) {
      if (row.size() != task.width) throw OracleError("per-node output has the wrong width");
      for (double v : row) {
        if (!std::isfinite(v)) throw OracleError("per-node output contains a non-finite value");
      }
    }
  } else if (!per_node.empty()) {
    throw OracleError("entity-level prediction must not carry per-node outputs");
  }
}

double prediction_distance(const Prediction& a, const Prediction& b) {
  if (!(a.task == b.task)) throw InvalidArgument("prediction_distance: task mismatch");
  if (a.values.size() != b.values.size()) throw InvalidArgument("prediction_distance: length mismatch");

  switch (a.task.kind) {
    case TaskKind::EntityBinary:
      if (a.values.size() != 1) throw InvalidArgument("prediction_distance: binary prediction must have 1 value");
      return std::abs(a.values[0] - b.values[0]);
    case TaskKind::EntityMulticlass:
    case TaskKind::EntityRegression:
      return abs_sum(a.values, b.values);
    case TaskKind::GraphMulticlass:
    case TaskKind::GraphRegression: {
      if (a.per_node.size() != b.per_node.size() || a.per_node.empty())
        throw InvalidArgument("prediction_distance: per-node count mismatch");
      double total = 0.0;
      for (std::size_t n = 0; n < a.per_node.size(); ++n) {
        if (a.per_node[n].size() != b.per_node[n].size())
          throw InvalidArgument("prediction_distance: per-node length mismatch");
        total += abs_sum(a.per_node[n], b.per_node[n]);
      }
      return total / static_cast<double>(a.per_node.size());
    }
  }
  return 0.0;
}

Prediction checked_predict(const ModelOracle& oracle, const EventStore& store, std::span<const EventId> included,
                           EventId target) {
  Prediction p;
  try {
    p = oracle.predict(store, included, target);
  } catch (const OracleError&) {
    throw;
  } catch (const std::exception& e) {
    throw OracleError(std::string("oracle failure: ") + e.what());
  }
  if (!(p.task == oracle.task())) throw OracleError("oracle answered with a different task kind");
  p.validate();
  return p;
}

Prediction CallbackOracle::predict(const EventStore&, std::span<const EventId> included, EventId target) const {
  Prediction p;
  p.task = task_;
  p.values = fn_(included, target);
  return p;
}

}  // namespace stx
