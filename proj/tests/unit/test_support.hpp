#pragma once

#include <algorithm>
#include <filesystem>
#include <set>
#include <vector>

#include "stx/random.hpp"
#include "stx/temporal_graph.hpp"

namespace stx::testing {

inline Event make_event(EventId id, NodeId src, std::optional<NodeId> dst, double t, std::vector<double> attrs = {}) {
  Event ev;
  ev.id = id;
  ev.source = src;
  ev.destination = dst;
  ev.timestamp = t;
  ev.attributes = std::move(attrs);
  return ev;
}

/// Small random store: integer timestamps (to force ties), occasional node
/// events, ids shuffled relative to time.
inline EventStore random_store(std::uint64_t seed, std::size_t n_events, std::size_t n_nodes) {
  Rng rng(seed);
  std::vector<Event> events;
  for (std::size_t i = 0; i < n_events; ++i) {
    const auto src = static_cast<NodeId>(rng.uniform_index(n_nodes));
    std::optional<NodeId> dst;
    if (rng.uniform01() < 0.85) dst = static_cast<NodeId>(rng.uniform_index(n_nodes));
    const auto t = static_cast<double>(rng.uniform_index(8));
    events.push_back(make_event(static_cast<EventId>(i * 7 % 101), src, dst, t));
  }
  return EventStore(std::move(events));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::path(STX_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace stx::testing
