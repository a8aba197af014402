#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stx {

using EventId = std::int64_t;
using NodeId = std::int64_t;

/// One timestamped interaction (source -> destination) or node event
/// (no destination).
struct Event {
  EventId id = 0;
  NodeId source = 0;
  std::optional<NodeId> destination;
  double timestamp = 0.0;
  std::vector<double> attributes;
  std::optional<std::int64_t> label;
};

enum class DatasetFormat { JodieCsv, EventsJsonl };

DatasetFormat parse_dataset_format(std::string_view tag);
std::string_view to_string(DatasetFormat format);

struct LoadOptions {
  // Offset applied to item ids in jodie-csv files. Defaults to
  // max(user id) + 1 over the whole file.
  std::optional<NodeId> user_count;
};

/// Immutable, time-ordered event collection with a per-node incidence index.
///
/// Events are ordered by (timestamp, id). Positions returned by the index
/// accessors refer to that order.
class EventStore {
 public:
  EventStore() = default;
  explicit EventStore(std::vector<Event> events);

  [[nodiscard]] std::span<const Event> events() const { return events_; }
  [[nodiscard]] std::size_t size() const { return events_.size(); }
  [[nodiscard]] bool empty() const { return events_.empty(); }
  [[nodiscard]] std::size_t attribute_dim() const { return attribute_dim_; }

  [[nodiscard]] bool contains(EventId id) const { return position_.contains(id); }
  /// Throws DataError for unknown ids.
  [[nodiscard]] const Event& event(EventId id) const;
  [[nodiscard]] std::size_t position(EventId id) const;
  [[nodiscard]] const Event& at(std::size_t position) const { return events_[position]; }

  /// Positions of events incident to `node`, in store order. Empty for
  /// unknown nodes.
  [[nodiscard]] std::span<const std::size_t> incident(NodeId node) const;
  /// Ids of events incident to `node`, in store order.
  [[nodiscard]] std::vector<EventId> incident_events(NodeId node) const;
  [[nodiscard]] std::size_t node_count() const { return node_index_.size(); }

  /// Ids of all events with timestamp strictly below `t`, in store order.
  [[nodiscard]] std::vector<EventId> events_before(double t) const;
  /// Number of events with timestamp strictly below `t`.
  [[nodiscard]] std::size_t count_before(double t) const;

 private:
  std::vector<Event> events_;
  std::unordered_map<EventId, std::size_t> position_;
  std::unordered_map<NodeId, std::vector<std::size_t>> node_index_;
  std::size_t attribute_dim_ = 0;
};

EventStore load_events(std::istream& in, DatasetFormat format, const LoadOptions& options = {});
EventStore load_events_file(const std::filesystem::path& path, DatasetFormat format,
                            const LoadOptions& options = {});

/// Candidate events for explaining one target: everything within `hops`
/// message-passing hops of the target's nodes that happened strictly
/// before the target.
struct ComputationGraph {
  EventId target_event_id = 0;
  double target_time = 0.0;
  int hops = 1;
  // Ordered by (timestamp, id).
  std::vector<EventId> candidate_ids;

  [[nodiscard]] std::size_t size() const { return candidate_ids.size(); }
  [[nodiscard]] bool contains(EventId id) const;
};

ComputationGraph extract_computation_graph(const EventStore& store, EventId target, int hops);

}  // namespace stx
