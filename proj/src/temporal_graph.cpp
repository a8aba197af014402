#include "stx/temporal_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "stx/error.hpp"

namespace stx {

namespace {

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

bool event_less(const Event& a, const Event& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.id < b.id;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

void check_timestamp(double t, std::size_t line_no) {
  if (!std::isfinite(t)) throw DataError(line_prefix(line_no) + "non-finite timestamp");
  if (t < 0.0) throw DataError(line_prefix(line_no) + "negative timestamp");
}

struct JodieRow {
  NodeId user;
  NodeId item;
  double timestamp;
  std::int64_t label;
  std::vector<double> features;
  std::size_t line_no;
};

EventStore load_jodie_csv(std::istream& in, const LoadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return EventStore{};  // no header at all
  ++line_no;

  std::vector<JodieRow> rows;
  NodeId max_user = -1;
  std::optional<std::size_t> dim;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      fields.push_back(view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 4) {
      throw DataError(line_prefix(line_no) + "expected at least 4 columns, got " + std::to_string(fields.size()));
    }

    JodieRow row{};
    row.line_no = line_no;
    if (!parse_number(fields[0], row.user) || row.user < 0)
      throw DataError(line_prefix(line_no) + "invalid source id");
    if (!parse_number(fields[1], row.item) || row.item < 0)
      throw DataError(line_prefix(line_no) + "invalid destination id");
    if (!parse_number(fields[2], row.timestamp)) throw DataError(line_prefix(line_no) + "invalid timestamp");
    check_timestamp(row.timestamp, line_no);
    double label_value = 0.0;
    if (!parse_number(fields[3], label_value) || !std::isfinite(label_value))
      throw DataError(line_prefix(line_no) + "invalid state label");
    row.label = static_cast<std::int64_t>(label_value);

    row.features.reserve(fields.size() - 4);
    for (std::size_t i = 4; i < fields.size(); ++i) {
      double v = 0.0;
      if (!parse_number(fields[i], v) || !std::isfinite(v))
        throw DataError(line_prefix(line_no) + "invalid feature in column " + std::to_string(i + 1));
      row.features.push_back(v);
    }
    if (!dim) dim = row.features.size();
    if (*dim != row.features.size()) {
      throw DataError(line_prefix(line_no) + "inconsistent attribute length (expected " + std::to_string(*dim) +
                      ", got " + std::to_string(row.features.size()) + ")");
    }
    max_user = std::max(max_user, row.user);
    rows.push_back(std::move(row));
  }

  const NodeId offset = options.user_count.value_or(max_user + 1);
  if (offset <= max_user && !rows.empty()) {
    throw DataError("user count " + std::to_string(offset) + " does not exceed the largest user id " +
                    std::to_string(max_user));
  }

  std::vector<Event> events;
  events.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    events.push_back(Event{static_cast<EventId>(i), r.user, r.item + offset, r.timestamp, std::move(r.features),
                           r.label});
  }
  return EventStore(std::move(events));
}

EventStore load_events_jsonl(std::istream& in) {
  using nlohmann::json;
  std::string line;
  std::size_t line_no = 0;
  std::vector<Event> events;
  std::optional<std::size_t> dim;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(line_prefix(line_no) + "invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw DataError(line_prefix(line_no) + "expected a JSON object");

    Event ev;
    try {
      ev.id = obj.contains("id") ? obj.at("id").get<EventId>() : static_cast<EventId>(events.size());
      ev.source = obj.at("src").get<NodeId>();
      const auto& dst = obj.at("dst");
      if (!dst.is_null()) ev.destination = dst.get<NodeId>();
      const auto& t = obj.at("t");
      if (!t.is_number()) throw DataError(line_prefix(line_no) + "timestamp must be a number");
      ev.timestamp = t.get<double>();
      const auto& attrs = obj.at("attrs");
      if (!attrs.is_array()) throw DataError(line_prefix(line_no) + "attrs must be an array");
      ev.attributes.reserve(attrs.size());
      for (const auto& a : attrs) {
        if (!a.is_number()) throw DataError(line_prefix(line_no) + "attrs must contain numbers only");
        ev.attributes.push_back(a.get<double>());
      }
      if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) ev.label = it->get<std::int64_t>();
    } catch (const json::exception& e) {
      throw DataError(line_prefix(line_no) + "malformed record: " + e.what());
    }
    if (ev.id < 0) throw DataError(line_prefix(line_no) + "negative event id");
    check_timestamp(ev.timestamp, line_no);
    if (!dim) dim = ev.attributes.size();
    if (*dim != ev.attributes.size()) {
      throw DataError(line_prefix(line_no) + "inconsistent attribute length (expected " + std::to_string(*dim) +
                      ", got " + std::to_string(ev.attributes.size()) + ")");
    }
    events.push_back(std::move(ev));
  }
  return EventStore(std::move(events));
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view tag) {
  if (tag == "jodie-csv") return DatasetFormat::JodieCsv;
  if (tag == "events-jsonl") return DatasetFormat::EventsJsonl;
  throw InvalidArgument("unknown dataset format '" + std::string(tag) + "'");
}

std::string_view to_string(DatasetFormat format) {
  return format == DatasetFormat::JodieCsv ? "jodie-csv" : "events-jsonl";
}

EventStore::EventStore(std::vector<Event> events) : events_(std::move(events)) {
  std::stable_sort(events_.begin(), events_.end(), event_less);
  position_.reserve(events_.size());
  if (!events_.empty()) attribute_dim_ = events_.front().attributes.size();
  for (std::size_t pos = 0; pos < events_.size(); ++pos) {
    const Event& ev = events_[pos];
    if (ev.id < 0) throw DataError("event id " + std::to_string(ev.id) + " is negative");
    if (!std::isfinite(ev.timestamp) || ev.timestamp < 0.0)
      throw DataError("event " + std::to_string(ev.id) + " has an invalid timestamp");
    if (ev.attributes.size() != attribute_dim_)
      throw DataError("event " + std::to_string(ev.id) + " has inconsistent attribute length");
    if (!position_.emplace(ev.id, pos).second) throw DataError("duplicate event id " + std::to_string(ev.id));
    node_index_[ev.source].push_back(pos);
    if (ev.destination && *ev.destination != ev.source) node_index_[*ev.destination].push_back(pos);
  }
}

const Event& EventStore::event(EventId id) const { return events_[position(id)]; }

std::size_t EventStore::position(EventId id) const {
  auto it = position_.find(id);
  if (it == position_.end()) throw DataError("unknown event id " + std::to_string(id));
  return it->second;
}

std::span<const std::size_t> EventStore::incident(NodeId node) const {
  auto it = node_index_.find(node);
  if (it == node_index_.end()) return {};
  return it->second;
}

std::vector<EventId> EventStore::incident_events(NodeId node) const {
  std::vector<EventId> out;
  for (std::size_t pos : incident(node)) out.push_back(events_[pos].id);
  return out;
}

std::size_t EventStore::count_before(double t) const {
  auto it = std::lower_bound(events_.begin(), events_.end(), t,
                             [](const Event& ev, double value) { return ev.timestamp < value; });
  return static_cast<std::size_t>(it - events_.begin());
}

std::vector<EventId> EventStore::events_before(double t) const {
  const std::size_t n = count_before(t);
  std::vector<EventId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(events_[i].id);
  return out;
}

EventStore load_events(std::istream& in, DatasetFormat format, const LoadOptions& options) {
  return format == DatasetFormat::JodieCsv ? load_jodie_csv(in, options) : load_events_jsonl(in);
}

EventStore load_events_file(const std::filesystem::path& path, DatasetFormat format, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return load_events(in, format, options);
}

bool ComputationGraph::contains(EventId id) const {
  return std::find(candidate_ids.begin(), candidate_ids.end(), id) != candidate_ids.end();
}

ComputationGraph extract_computation_graph(const EventStore& store, EventId target, int hops) {
  if (hops < 1) throw InvalidArgument("hops must be >= 1, got " + std::to_string(hops));
  const Event& target_event = store.event(target);
  const double t_k = target_event.timestamp;
  const std::size_t horizon = store.count_before(t_k);

  std::unordered_set<NodeId> frontier{target_event.source};
  if (target_event.destination) frontier.insert(*target_event.destination);
  std::vector<NodeId> fresh(frontier.begin(), frontier.end());
  std::vector<char> taken(horizon, 0);

  // Events incident to nodes already expanded were collected in an earlier
  // hop, so each hop only needs to scan the nodes added by the previous one.
  for (int hop = 1; hop <= hops && !fresh.empty(); ++hop) {
    std::vector<NodeId> next;
    for (NodeId node : fresh) {
      for (std::size_t pos : store.incident(node)) {
        if (pos >= horizon) break;  // incidence lists are in store order
        if (taken[pos]) continue;
        taken[pos] = 1;
        const Event& ev = store.at(pos);
        if (frontier.insert(ev.source).second) next.push_back(ev.source);
        if (ev.destination && frontier.insert(*ev.destination).second) next.push_back(*ev.destination);
      }
    }
    fresh = std::move(next);
  }

  ComputationGraph cg;
  cg.target_event_id = target;
  cg.target_time = t_k;
  cg.hops = hops;
  for (std::size_t pos = 0; pos < horizon; ++pos) {
    if (taken[pos]) cg.candidate_ids.push_back(store.at(pos).id);
  }
  return cg;
}

}  // namespace stx
