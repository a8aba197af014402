#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "stx/error.hpp"
#include "stx/metrics.hpp"
#include "stx/synthetic.hpp"

namespace stx {
namespace {

TEST(DeltaFidelity, Examples) {
  EXPECT_EQ(delta_fidelity(4, 2), 2);
  EXPECT_EQ(delta_fidelity(3.25, 3.25), 0);
  EXPECT_EQ(delta_fidelity(0, 5), -5);
  for (double a : {0.0, 0.5, 7.0})
    for (double b : {0.0, 1.5, 9.0}) EXPECT_EQ(delta_fidelity(a, b), -delta_fidelity(b, a));
}

TEST(AlphaFidelity, Examples) {
  EXPECT_DOUBLE_EQ(alpha_fidelity(4, 2), 2.0);
  EXPECT_DOUBLE_EQ(alpha_fidelity(0.3, 0.3), 1.0);
  EXPECT_EQ(alpha_fidelity(3, 0), kAlphaFidelityCap);
  EXPECT_EQ(kAlphaFidelityCap, 1e8);
  // Below the floor the denominator is the floor itself.
  EXPECT_DOUBLE_EQ(alpha_fidelity(0.5, 1e-12), 0.5 / 1e-8);
  EXPECT_EQ(alpha_fidelity(0, 0), 0.0);
}

TEST(AlphaFidelityProperty, FiniteNonNegativeAndCapped) {
  for (double plus : {0.0, 1e-300, 1e-9, 0.1, 1.0, 1e5, 1e300}) {
    for (double minus : {0.0, 1e-300, 1e-9, 1e-8, 0.1, 1.0, 1e300}) {
      const double a = alpha_fidelity(plus, minus);
      EXPECT_TRUE(std::isfinite(a));
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, kAlphaFidelityCap);
    }
  }
}

TEST(Sparsity, Examples) {
  EXPECT_EQ(sparsity(20, 100), 0.8);
  EXPECT_EQ(sparsity(37, 37), 0.0);
  EXPECT_EQ(sparsity(0, 37), 1.0);
  EXPECT_THROW((void)sparsity(0, 0), InvalidArgument);
  EXPECT_THROW((void)sparsity(5, 4), InvalidArgument);
}

TEST(Objective, Examples) {
  FidelityReport r;
  r.error = 0.2;
  EXPECT_DOUBLE_EQ(objective(r, {1, 0, 0}), 0.2);

  r.error = 0.1;
  r.alpha_fid = 5;
  EXPECT_DOUBLE_EQ(objective(r, {1, 1, 0}), -4.9);

  r.error = 0;
  r.alpha_fid = kAlphaFidelityCap;
  r.sparsity = 0.9;
  EXPECT_DOUBLE_EQ(objective(r, {1, 1, 0.1}), -1e8 - 0.09);
}

TEST(ObjectiveWeights, Validation) {
  EXPECT_THROW((ObjectiveWeights{0, 0, 0}).validate(), InvalidArgument);
  EXPECT_THROW((ObjectiveWeights{1, -1, 0}).validate(), InvalidArgument);
  EXPECT_THROW((ObjectiveWeights{1, 0, 1.5}).validate(), InvalidArgument);
  EXPECT_NO_THROW((ObjectiveWeights{0, 0, 0.5}).validate());
}

TEST(MakeReport, FieldsAreConsistent) {
  const auto r = make_report(4.0, 2.0, 20, 100);
  EXPECT_EQ(r.delta_fid, r.fid_plus - r.fid_minus);
  EXPECT_EQ(r.alpha_fid, 2.0);
  EXPECT_EQ(r.sparsity, 0.8);
  EXPECT_EQ(r.error, r.fid_minus);
}

// Planted world: five events, two planted singletons (ids 1, 3) and no
// noise. Target at t=10, tau=5.
struct PlantedWorld {
  EventStore store;
  PlantedOracle oracle;
  ComputationGraph cg;

  PlantedWorld()
      : store(make_store()),
        oracle(make_model()),
        cg(extract_computation_graph(store, 5, 1)) {}

  static EventStore make_store() {
    std::vector<Event> ev;
    for (int i = 0; i < 5; ++i) ev.push_back(Event{i, 0, 1 + i, double(i + 1), {}, std::nullopt});
    ev.push_back(Event{5, 0, 99, 10.0, {}, std::nullopt});
    return EventStore(std::move(ev));
  }
  static PlantedModel make_model() {
    PlantedModel m;
    m.target = 5;
    m.bias = 0.5;
    m.tau = 5.0;
    m.singletons = {{1, 2.0}, {3, 1.0}};
    return m;
  }
};

TEST(Fidelity, PlantedHandEvaluation) {
  PlantedWorld w;
  ASSERT_EQ(w.cg.size(), 5u);
  const double magnitude = 2.0 * std::exp(-(10.0 - 2.0) / 5.0) + 1.0 * std::exp(-(10.0 - 4.0) / 5.0);
  const std::vector<EventId> planted{1, 3};
  const std::vector<EventId> none;

  EXPECT_EQ(fidelity_minus(w.oracle, w.store, w.cg, planted), 0.0);
  EXPECT_NEAR(fidelity_minus(w.oracle, w.store, w.cg, none), magnitude, 1e-15);
  EXPECT_NEAR(fidelity_plus(w.oracle, w.store, w.cg, planted), magnitude, 1e-15);
  EXPECT_EQ(fidelity_plus(w.oracle, w.store, w.cg, none), 0.0);
  EXPECT_EQ(fidelity_minus(w.oracle, w.store, w.cg, w.cg.candidate_ids), 0.0);
  EXPECT_NEAR(fidelity_plus(w.oracle, w.store, w.cg, w.cg.candidate_ids), magnitude, 1e-15);
}

TEST(Fidelity, RejectsSubsetsOutsideTheGraph) {
  PlantedWorld w;
  const std::vector<EventId> outside{5};
  EXPECT_THROW((void)fidelity_minus(w.oracle, w.store, w.cg, outside), InvalidArgument);
  const std::vector<EventId> dup{1, 1};
  EXPECT_THROW((void)fidelity_plus(w.oracle, w.store, w.cg, dup), InvalidArgument);
}

TEST(FidelityProperty, IdentitiesHoldForArbitraryOracles) {
  // A deliberately non-additive oracle: value depends on pairs of ids.
  CallbackOracle odd(TaskSpec::entity_multiclass(2), [](std::span<const EventId> ids, EventId) {
    double a = 0, b = 1;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      a += std::sin(double(ids[i]) * 1.7);
      if (i > 0) b *= 1.0 + 0.1 * double(ids[i] - ids[i - 1]);
    }
    return std::vector<double>{a, b};
  });
  PlantedWorld w;
  const FidelityEvaluator eval(odd, w.store, w.cg);
  EXPECT_EQ(eval.fidelity_minus(w.cg.candidate_ids), 0.0);
  EXPECT_EQ(eval.fidelity_plus({}), 0.0);
}

TEST(FidelityProperty, ZeroWeightCandidateDoesNotChangeFidelityMinus) {
  PlantedWorld w;
  const FidelityEvaluator eval(w.oracle, w.store, w.cg);
  const std::vector<EventId> base{1};
  const std::vector<EventId> with_zero{1, 2};
  EXPECT_EQ(eval.fidelity_minus(base), eval.fidelity_minus(with_zero));
}

TEST(FidelityProperty, PureErrorObjectiveOrdersLikeFidelityMinus) {
  PlantedWorld w;
  const FidelityEvaluator eval(w.oracle, w.store, w.cg);
  std::vector<std::pair<double, std::vector<EventId>>> by_fid;
  std::vector<std::vector<EventId>> subsets;
  for (unsigned mask = 1; mask < 32; ++mask) {
    std::vector<EventId> s;
    for (int i = 0; i < 5; ++i)
      if (mask & (1u << i)) s.push_back(i);
    subsets.push_back(s);
  }
  for (double eps : {0.5, 1.0, 3.0}) {
    auto key_fid = [&](const auto& s) { return eval.fidelity_minus(s); };
    auto key_obj = [&](const auto& s) {
      return objective(make_report(0.0, eval.fidelity_minus(s), s.size(), w.cg.size()), {eps, 0, 0});
    };
    auto a = subsets, b = subsets;
    std::stable_sort(a.begin(), a.end(), [&](auto& x, auto& y) { return key_fid(x) < key_fid(y); });
    std::stable_sort(b.begin(), b.end(), [&](auto& x, auto& y) { return key_obj(x) < key_obj(y); });
    EXPECT_EQ(a, b) << "eps " << eps;
  }
}

TEST(FidelityEvaluator, CachesReferenceAndCountsCalls) {
  PlantedWorld w;
  int calls = 0;
  CallbackOracle counting(TaskSpec::entity_regression(1), [&](std::span<const EventId> ids, EventId) {
    ++calls;
    return std::vector<double>{double(ids.size())};
  });
  const FidelityEvaluator eval(counting, w.store, w.cg);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(eval.reference().values[0], 5.0);
  const std::vector<EventId> r{0, 4};
  (void)eval.fidelity_minus(r);
  EXPECT_EQ(calls, 2);
  (void)eval.report(r);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(eval.complement(r), (std::vector<EventId>{1, 2, 3}));
}

}  // namespace
}  // namespace stx
