#include "stx/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_set>

#include "stx/error.hpp"

namespace stx {

using nlohmann::json;
using nlohmann::ordered_json;

void PlantedSpec::validate() const {
  if (n_nodes < 3) throw InvalidArgument("planted spec needs at least 3 nodes");
  if (n_events < 1) throw InvalidArgument("planted spec needs at least 1 event");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be positive");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw InvalidArgument("noise scale must be >= 0");
  if (!std::isfinite(bias)) throw InvalidArgument("bias must be finite");

  const std::size_t planted = singletons.size() + 2 * pairs.size();
  if (planted > n_events) {
    throw InvalidArgument("spec infeasible: " + std::to_string(planted) + " planted events but only " +
                          std::to_string(n_events) + " events");
  }
  std::unordered_set<std::size_t> seen;
  auto claim = [&](std::size_t index, double weight) {
    if (index >= n_events) throw InvalidArgument("planted index " + std::to_string(index) + " out of range");
    if (!seen.insert(index).second) throw InvalidArgument("planted index " + std::to_string(index) + " repeated");
    if (!std::isfinite(weight)) throw InvalidArgument("planted weight must be finite");
  };
  for (const auto& [index, weight] : singletons) claim(index, weight);
  for (const auto& p : pairs) {
    if (p.first == p.second) throw InvalidArgument("pair members must be distinct");
    claim(p.first, p.weight);
    claim(p.second, p.weight);
  }
}

PlantedSpec random_planted_spec(std::size_t n_events, std::size_t n_nodes, std::size_t n_singletons,
                                std::size_t n_pairs, double noise_scale, std::uint64_t seed) {
  PlantedSpec spec;
  spec.n_events = n_events;
  spec.n_nodes = n_nodes;
  spec.noise_scale = noise_scale;
  spec.seed = seed;
  spec.tau = std::max(1.0, static_cast<double>(n_events) / 2.0);

  const std::size_t planted = n_singletons + 2 * n_pairs;
  if (planted > n_events) {
    throw InvalidArgument("spec infeasible: " + std::to_string(planted) + " planted events but only " +
                          std::to_string(n_events) + " events");
  }
  if (planted == 0) throw InvalidArgument("spec needs at least one planted event");

  // Separate stream from generate() so weights do not shift event layout.
  Rng rng = Rng::stream(seed, 0x706c616eULL);
  std::vector<std::size_t> order(n_events);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < planted; ++i) std::swap(order[i], order[i + rng.uniform_index(n_events - i)]);

  std::size_t next = 0;
  for (std::size_t i = 0; i < n_singletons; ++i) spec.singletons.emplace_back(order[next++], rng.uniform(0.5, 1.5));
  for (std::size_t i = 0; i < n_pairs; ++i) {
    PlantedPair p;
    p.first = order[next++];
    p.second = order[next++];
    p.weight = rng.uniform(0.5, 1.5);
    spec.pairs.push_back(p);
  }
  spec.validate();
  return spec;
}

GroundTruth PlantedModel::ground_truth() const {
  GroundTruth truth;
  for (const auto& s : singletons) truth.important_ids.push_back(s.id);
  for (const auto& p : pairs) {
    truth.important_ids.push_back(p.first);
    truth.important_ids.push_back(p.second);
  }
  std::sort(truth.important_ids.begin(), truth.important_ids.end());
  truth.important_ids.erase(std::unique(truth.important_ids.begin(), truth.important_ids.end()),
                            truth.important_ids.end());
  return truth;
}

ordered_json PlantedModel::to_json() const {
  ordered_json j;
  j["important"] = ground_truth().important_ids;
  ordered_json pair_ids = ordered_json::array();
  ordered_json pair_weights = ordered_json::array();
  for (const auto& p : pairs) {
    pair_ids.push_back({p.first, p.second});
    pair_weights.push_back(p.weight);
  }
  j["pairs"] = pair_ids;
  j["bias"] = bias;
  j["tau"] = tau;
  j["target"] = target;
  ordered_json single = ordered_json::array();
  for (const auto& s : singletons) single.push_back({s.id, s.weight});
  j["singletons"] = single;
  j["pair_weights"] = pair_weights;
  j["noise_scale"] = noise_scale;
  ordered_json noise_terms = ordered_json::array();
  for (const auto& n : noise) noise_terms.push_back({n.id, n.weight});
  j["noise"] = noise_terms;
  return j;
}

PlantedModel PlantedModel::from_json(const json& j) {
  PlantedModel m;
  try {
    m.bias = j.at("bias").get<double>();
    m.tau = j.at("tau").get<double>();
    m.target = j.value("target", EventId{0});
    m.noise_scale = j.value("noise_scale", 0.0);
    for (const auto& s : j.at("singletons")) m.singletons.push_back({s.at(0).get<EventId>(), s.at(1).get<double>()});
    const auto& pairs = j.at("pairs");
    const auto& weights = j.at("pair_weights");
    if (pairs.size() != weights.size()) throw DataError("ground truth: pairs and pair_weights differ in length");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      m.pairs.push_back({pairs[i].at(0).get<EventId>(), pairs[i].at(1).get<EventId>(), weights[i].get<double>()});
    }
    if (auto it = j.find("noise"); it != j.end()) {
      for (const auto& n : *it) m.noise.push_back({n.at(0).get<EventId>(), n.at(1).get<double>()});
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed ground-truth document: ") + e.what());
  }
  if (!(m.tau > 0.0)) throw DataError("ground truth: tau must be positive");
  auto by_id = [](const PlantedTerm& a, const PlantedTerm& b) { return a.id < b.id; };
  std::sort(m.singletons.begin(), m.singletons.end(), by_id);
  std::sort(m.noise.begin(), m.noise.end(), by_id);
  return m;
}

SyntheticInstance generate(const PlantedSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.n_events;
  const NodeId anchors[2] = {0, 1};

  auto random_attrs = [&] {
    std::vector<double> attrs(spec.attribute_dim);
    for (double& a : attrs) a = rng.uniform(-1.0, 1.0);
    return attrs;
  };

  // Every event touches either a target node (hop 1) or a node already
  // linked to one (hop 2).
  std::vector<NodeId> neighbours;
  std::vector<char> is_neighbour(spec.n_nodes, 0);
  std::vector<Event> events;
  events.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    Event ev;
    ev.id = static_cast<EventId>(i);
    ev.timestamp = static_cast<double>(i) + 0.25 + 0.5 * rng.uniform01();
    const bool direct = neighbours.empty() || rng.uniform01() < 0.5;
    if (direct) {
      ev.source = anchors[rng.uniform_index(2)];
      const NodeId other = 2 + static_cast<NodeId>(rng.uniform_index(spec.n_nodes - 2));
      ev.destination = other;
      if (!is_neighbour[other]) {
        is_neighbour[other] = 1;
        neighbours.push_back(other);
      }
    } else {
      ev.source = neighbours[rng.uniform_index(neighbours.size())];
      auto other = static_cast<NodeId>(rng.uniform_index(spec.n_nodes - 1));
      if (other >= ev.source) ++other;
      ev.destination = other;
    }
    ev.attributes = random_attrs();
    events.push_back(std::move(ev));
  }

  const auto target = static_cast<EventId>(n);
  Event target_event;
  target_event.id = target;
  target_event.source = anchors[0];
  target_event.destination = anchors[1];
  target_event.timestamp = static_cast<double>(n) + 1.0;
  target_event.attributes = random_attrs();
  events.push_back(std::move(target_event));

  PlantedModel model;
  model.target = target;
  model.bias = spec.bias;
  model.tau = spec.tau;
  model.noise_scale = spec.noise_scale;
  std::vector<char> planted(n, 0);
  for (const auto& [index, weight] : spec.singletons) {
    model.singletons.push_back({static_cast<EventId>(index), weight});
    planted[index] = 1;
  }
  for (const auto& p : spec.pairs) {
    model.pairs.push_back({static_cast<EventId>(p.first), static_cast<EventId>(p.second), p.weight});
    planted[p.first] = planted[p.second] = 1;
  }
  std::sort(model.singletons.begin(), model.singletons.end(),
            [](const PlantedTerm& a, const PlantedTerm& b) { return a.id < b.id; });
  if (spec.noise_scale > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!planted[i]) model.noise.push_back({static_cast<EventId>(i), rng.uniform(-spec.noise_scale, spec.noise_scale)});
    }
  }

  SyntheticInstance out{EventStore(std::move(events)), target, model.ground_truth(), std::move(model)};
  return out;
}

double planted_value(const PlantedModel& model, const EventStore& store, std::span<const EventId> included,
                     double t_k) {
  std::vector<EventId> ids(included.begin(), included.end());
  std::sort(ids.begin(), ids.end());
  auto present = [&](EventId id) { return std::binary_search(ids.begin(), ids.end(), id); };
  auto decay = [&](double t) { return std::exp(-(t_k - t) / model.tau); };

  double value = model.bias;
  for (const auto& s : model.singletons) {
    if (present(s.id)) value += s.weight * decay(store.event(s.id).timestamp);
  }
  for (const auto& p : model.pairs) {
    if (present(p.first) && present(p.second)) {
      const double t = std::max(store.event(p.first).timestamp, store.event(p.second).timestamp);
      value += p.weight * decay(t);
    }
  }
  auto noise_it = model.noise.begin();
  for (EventId id : ids) {
    while (noise_it != model.noise.end() && noise_it->id < id) ++noise_it;
    if (noise_it == model.noise.end()) break;
    if (noise_it->id == id) value += noise_it->weight;
  }
  return value;
}

Prediction planted_predict(const PlantedModel& model, const EventStore& store, std::span<const EventId> included,
                           double t_k) {
  Prediction p;
  p.task = TaskSpec::entity_regression(1);
  p.values = {planted_value(model, store, included, t_k)};
  return p;
}

Prediction PlantedOracle::predict(const EventStore& store, std::span<const EventId> included, EventId target) const {
  return planted_predict(model_, store, included, store.event(target).timestamp);
}

RecoveryScore recovery_score(std::span<const EventId> explanation, const GroundTruth& truth) {
  if (explanation.empty()) throw InvalidArgument("recovery score of an empty explanation is undefined");
  if (truth.important_ids.empty()) throw InvalidArgument("ground truth is empty");
  std::unordered_set<EventId> important(truth.important_ids.begin(), truth.important_ids.end());
  std::unordered_set<EventId> chosen(explanation.begin(), explanation.end());
  std::size_t hits = 0;
  for (EventId id : chosen) hits += important.contains(id) ? 1 : 0;
  return {static_cast<double>(hits) / static_cast<double>(chosen.size()),
          static_cast<double>(hits) / static_cast<double>(important.size())};
}

void write_events_jsonl(std::ostream& out, const EventStore& store) {
  std::size_t line = 0;
  for (const Event& ev : store.events()) {
    ordered_json j;
    if (ev.id != static_cast<EventId>(line)) j["id"] = ev.id;
    j["src"] = ev.source;
    j["dst"] = ev.destination ? ordered_json(*ev.destination) : ordered_json(nullptr);
    j["t"] = ev.timestamp;
    j["attrs"] = ev.attributes;
    if (ev.label) j["label"] = *ev.label;
    out << j.dump() << '\n';
    ++line;
  }
}

void write_ground_truth(std::ostream& out, const PlantedModel& model) { out << model.to_json().dump() << '\n'; }

PlantedModel read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ground-truth file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("ground-truth file '" + path.string() + "': " + e.what());
  }
  return PlantedModel::from_json(j);
}

}  // namespace stx
