#include "stx/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "stx/error.hpp"

namespace stx {

void SearchConfig::validate() const {
  if (size < 1) throw InvalidArgument("explanation size must be >= 1");
  if (stages < 1 || stages > 3) throw InvalidArgument("stages must be 1, 2 or 3");
  if (iterations_per_stage < 0) throw InvalidArgument("iterations per stage must be >= 0");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw InvalidArgument("initial temperature must be positive");
  if (!(cooling > 0.0 && cooling < 1.0)) throw InvalidArgument("cooling rate must lie in (0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  const MoveMix& m = stage3_move_mix;
  if (!(m.remove >= 0.0 && m.add >= 0.0 && m.swap >= 0.0))
    throw InvalidArgument("move mix probabilities must be non-negative");
  if (std::abs(m.remove + m.add + m.swap - 1.0) > 1e-9) throw InvalidArgument("move mix must sum to 1");
}

ObjectiveWeights stage_weights(int stage, double lambda) {
  switch (stage) {
    case 1: return {1.0, 0.0, 0.0};
    case 2: return {1.0, 1.0, 0.0};
    case 3: return {1.0, 1.0, lambda};
    default: throw InvalidArgument("stage must be 1, 2 or 3");
  }
}

std::vector<EventId> initial_solution(const ComputationGraph& cg, std::size_t size, Rng& rng) {
  const std::size_t n = cg.size();
  if (size < 1 || size > n) {
    throw InvalidArgument("initial size " + std::to_string(size) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(order[i], order[j]);
  }
  std::vector<EventId> out;
  out.reserve(size);
  for (std::size_t i = 0; i < size; ++i) out.push_back(cg.candidate_ids[order[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

double accept_probability(double l_new, double l_old, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (l_new <= l_old) return 1.0;
  return std::exp(-std::abs(l_new - l_old) / temperature);
}

SubsetState::SubsetState(std::size_t candidate_count, std::span<const std::size_t> members) : slot_(candidate_count) {
  for (std::size_t pos : members) {
    if (pos >= candidate_count) throw InvalidArgument("subset position out of range");
    if (slot_[pos].inside) throw InvalidArgument("subset contains a duplicate");
    slot_[pos].inside = true;
  }
  members_.reserve(candidate_count);
  outside_.reserve(candidate_count);
  for (std::size_t pos = 0; pos < candidate_count; ++pos) {
    auto& list = slot_[pos].inside ? members_ : outside_;
    slot_[pos].index = list.size();
    list.push_back(pos);
  }
}

void SubsetState::insert(std::size_t position) {
  Slot& s = slot_[position];
  if (s.inside) return;
  const std::size_t last = outside_.back();
  outside_[s.index] = last;
  slot_[last].index = s.index;
  outside_.pop_back();
  s.inside = true;
  s.index = members_.size();
  members_.push_back(position);
}

void SubsetState::erase(std::size_t position) {
  Slot& s = slot_[position];
  if (!s.inside) return;
  const std::size_t last = members_.back();
  members_[s.index] = last;
  slot_[last].index = s.index;
  members_.pop_back();
  s.inside = false;
  s.index = outside_.size();
  outside_.push_back(position);
}

std::optional<Move> draw_move(const SubsetState& state, int stage, Rng& rng, const MoveMix& mix) {
  const std::size_t k = state.size();
  const std::size_t excluded = state.excluded();
  auto pick_member = [&] { return state.members()[rng.uniform_index(k)]; };
  auto pick_outside = [&] { return state.outside()[rng.uniform_index(excluded)]; };

  if (stage < 3) {
    if (k == 0 || excluded == 0) return std::nullopt;
    Move m{MoveKind::Swap, pick_member(), std::nullopt};
    m.added = pick_outside();
    return m;
  }

  const double w_remove = k > 1 ? mix.remove : 0.0;
  const double w_add = excluded > 0 ? mix.add : 0.0;
  const double w_swap = (excluded > 0 && k > 0) ? mix.swap : 0.0;
  const double total = w_remove + w_add + w_swap;
  if (!(total > 0.0)) return std::nullopt;

  const double u = rng.uniform01() * total;
  if (u < w_remove) return Move{MoveKind::Remove, pick_member(), std::nullopt};
  if (u < w_remove + w_add || w_swap == 0.0) return Move{MoveKind::Add, std::nullopt, pick_outside()};
  Move m{MoveKind::Swap, pick_member(), std::nullopt};
  m.added = pick_outside();
  return m;
}

void apply_move(SubsetState& state, const Move& move) {
  if (move.removed) state.erase(*move.removed);
  if (move.added) state.insert(*move.added);
}

void undo_move(SubsetState& state, const Move& move) {
  if (move.added) state.erase(*move.added);
  if (move.removed) state.insert(*move.removed);
}

namespace {

std::vector<std::size_t> positions_of(const ComputationGraph& cg, std::span<const EventId> ids) {
  std::unordered_map<EventId, std::size_t> index;
  index.reserve(cg.size());
  for (std::size_t i = 0; i < cg.size(); ++i) index.emplace(cg.candidate_ids[i], i);
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (EventId id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw InvalidArgument("event " + std::to_string(id) + " is not a candidate");
    out.push_back(it->second);
  }
  return out;
}

std::vector<EventId> ids_of(const ComputationGraph& cg, std::span<const std::size_t> positions) {
  std::vector<EventId> out;
  out.reserve(positions.size());
  for (std::size_t pos : positions) out.push_back(cg.candidate_ids[pos]);
  std::sort(out.begin(), out.end());
  return out;
}

struct Scored {
  FidelityReport report;
  double objective = 0.0;
};

Scored score(const FidelityEvaluator& evaluator, const ObjectiveWeights& weights, std::span<const EventId> ids) {
  const double minus = evaluator.fidelity_minus(ids);
  // Fidelity+ costs a second oracle call and only matters through gamma.
  const double plus = weights.needs_complement() ? evaluator.fidelity_plus(ids) : 0.0;
  Scored s;
  s.report = make_report(plus, minus, ids.size(), evaluator.graph().size());
  s.objective = objective(s.report, weights);
  return s;
}

}  // namespace

std::vector<EventId> propose_move(std::span<const EventId> current, const ComputationGraph& cg, int stage, Rng& rng,
                                  const MoveMix& mix) {
  auto positions = positions_of(cg, current);
  std::sort(positions.begin(), positions.end());
  SubsetState state(cg.size(), positions);
  if (state.size() == 0) throw InvalidArgument("current explanation is empty");
  if (auto move = draw_move(state, stage, rng, mix)) apply_move(state, *move);
  return ids_of(cg, state.members());
}

StageResult run_stage(const FidelityEvaluator& evaluator, const ObjectiveWeights& weights, int stage,
                      const SearchConfig& config, std::span<const EventId> init, Rng& rng) {
  weights.validate();
  const ComputationGraph& cg = evaluator.graph();
  auto init_positions = positions_of(cg, init);
  std::sort(init_positions.begin(), init_positions.end());
  SubsetState state(cg.size(), init_positions);
  if (state.size() == 0) throw InvalidArgument("initial explanation is empty");

  StageResult result;
  std::vector<EventId> current_ids = ids_of(cg, state.members());
  Scored current = score(evaluator, weights, current_ids);
  std::vector<EventId> best_ids = current_ids;
  double best_objective = current.objective;

  result.trace.reserve(static_cast<std::size_t>(config.iterations_per_stage));
  double temperature = config.t0;
  for (int it = 0; it < config.iterations_per_stage; ++it) {
    const auto move = draw_move(state, stage, rng, config.stage3_move_mix);
    if (!move) break;
    apply_move(state, *move);
    const auto proposal_ids = ids_of(cg, state.members());

    Scored proposal;
    try {
      proposal = score(evaluator, weights, proposal_ids);
    } catch (const OracleError& e) {
      throw OracleError("stage " + std::to_string(stage) + ", iteration " + std::to_string(it) + ": " + e.what());
    }

    const double p = accept_probability(proposal.objective, current.objective, temperature);
    const bool accepted = p >= 1.0 || rng.uniform01() < p;
    if (accepted) {
      current = proposal;
      if (proposal.objective < best_objective) {
        best_objective = proposal.objective;
        best_ids = proposal_ids;
      }
    } else {
      undo_move(state, *move);
    }
    result.trace.push_back(TraceRecord{stage, it, temperature, proposal.objective, accepted, state.size()});
    temperature *= config.cooling;
  }

  result.best.event_ids = std::move(best_ids);
  result.best.stage = stage;
  result.best.report = evaluator.report(result.best.event_ids);
  result.best.objective_value = objective(result.best.report, weights);
  return result;
}

ExplainResult explain(const FidelityEvaluator& evaluator, const SearchConfig& config) {
  config.validate();
  const ComputationGraph& cg = evaluator.graph();
  if (cg.size() == 0) {
    throw DataError("event " + std::to_string(cg.target_event_id) + " has an empty computation graph");
  }

  ExplainResult result;
  result.candidate_count = cg.size();
  result.saturated = config.size > cg.size();

  Rng rng(config.seed);
  std::vector<EventId> current = initial_solution(cg, std::min(config.size, cg.size()), rng);
  for (int stage = 1; stage <= config.stages; ++stage) {
    StageResult r = run_stage(evaluator, stage_weights(stage, config.lambda), stage, config, current, rng);
    current = r.best.event_ids;
    result.trace.insert(result.trace.end(), r.trace.begin(), r.trace.end());
    result.stage_bests.push_back(std::move(r.best));
  }
  result.explanation = result.stage_bests.back();
  return result;
}

ExplainResult explain(const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg,
                      const SearchConfig& config) {
  config.validate();
  return explain(FidelityEvaluator(oracle, store, cg), config);
}

}  // namespace stx
