#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "stx/error.hpp"
#include "stx/temporal_graph.hpp"
#include "test_support.hpp"

namespace stx {
namespace {

using testing::make_event;

std::string jodie_row(int user, int item, double t, int label, int n_features) {
  std::ostringstream os;
  os << user << ',' << item << ',' << t << ',' << label;
  for (int i = 0; i < n_features; ++i) os << ',' << (i * 0.5);
  return os.str();
}

TEST(LoadEvents, ThreeRowCsv) {
  std::istringstream in("user_id,item_id,timestamp,state_label,f0,f1\n"
                        "0,0,1.0,0,0.1,0.2\n"
                        "1,0,2.0,0,0.3,0.4\n"
                        "0,1,3.5,1,0.5,0.6\n");
  const EventStore store = load_events(in, DatasetFormat::JodieCsv);
  ASSERT_EQ(store.size(), 3u);
  EXPECT_EQ(store.attribute_dim(), 2u);
  EXPECT_EQ(store.event(2).label, 1);
  EXPECT_DOUBLE_EQ(store.event(2).attributes[1], 0.6);
}

TEST(LoadEvents, EmptyBodyAfterHeader) {
  std::istringstream in("user_id,item_id,timestamp,state_label\n");
  const EventStore store = load_events(in, DatasetFormat::JodieCsv);
  EXPECT_TRUE(store.empty());
  EXPECT_EQ(store.attribute_dim(), 0u);
}

TEST(LoadEvents, JodieItemOffsetKeepsUsersAndItemsDisjoint) {
  std::istringstream in("u,i,ts,label,features\n" + jodie_row(0, 1, 36.0, 0, 172) + "\n");
  LoadOptions opts;
  opts.user_count = 1000;
  const EventStore store = load_events(in, DatasetFormat::JodieCsv, opts);
  const Event& ev = store.event(0);
  EXPECT_EQ(ev.source, 0);
  EXPECT_EQ(ev.destination, 1001);
  EXPECT_DOUBLE_EQ(ev.timestamp, 36.0);
  EXPECT_EQ(ev.attributes.size(), 172u);
}

TEST(LoadEvents, JodieOffsetDefaultsToMaxUserPlusOne) {
  std::istringstream in("h\n" + jodie_row(0, 1, 36.0, 0, 3) + "\n" + jodie_row(999, 0, 40.0, 0, 3) + "\n");
  const EventStore store = load_events(in, DatasetFormat::JodieCsv);
  EXPECT_EQ(store.event(0).destination, 1001);
  EXPECT_EQ(store.event(1).destination, 1000);
}

TEST(LoadEvents, MalformedRowReportsLineNumber) {
  std::istringstream in("h\n0,0,1.0,0,1\n0,zero,2.0,0,1\n");
  try {
    (void)load_events(in, DatasetFormat::JodieCsv);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadEvents, RejectsInconsistentAttributeLength) {
  std::istringstream in("h\n0,0,1.0,0,1,2\n0,0,2.0,0,1\n");
  EXPECT_THROW((void)load_events(in, DatasetFormat::JodieCsv), DataError);
}

TEST(LoadEvents, RejectsNonFiniteTimestamp) {
  std::istringstream csv("h\n0,0,inf,0\n");
  EXPECT_THROW((void)load_events(csv, DatasetFormat::JodieCsv), DataError);
  std::istringstream nan("h\n0,0,nan,0\n");
  EXPECT_THROW((void)load_events(nan, DatasetFormat::JodieCsv), DataError);
}

TEST(LoadEvents, JsonlWithNodeEventsAndLabels) {
  std::istringstream in(R"({"src":1,"dst":2,"t":0.5,"attrs":[1.0]}
{"src":3,"dst":null,"t":0.25,"attrs":[2.0],"label":1}

{"src":2,"dst":1,"t":0.5,"attrs":[3.0]}
)");
  const EventStore store = load_events(in, DatasetFormat::EventsJsonl);
  ASSERT_EQ(store.size(), 3u);
  // Sorted by (timestamp, id): the node event comes first.
  EXPECT_EQ(store.at(0).id, 1);
  EXPECT_FALSE(store.at(0).destination.has_value());
  EXPECT_EQ(store.at(0).label, 1);
  EXPECT_EQ(store.at(1).id, 0);
  EXPECT_EQ(store.at(2).id, 2);
}

TEST(LoadEvents, JsonlErrors) {
  std::istringstream bad_json("{\"src\":1,\n");
  EXPECT_THROW((void)load_events(bad_json, DatasetFormat::EventsJsonl), DataError);
  std::istringstream missing("{\"src\":1,\"t\":1,\"attrs\":[]}\n");
  EXPECT_THROW((void)load_events(missing, DatasetFormat::EventsJsonl), DataError);
  std::istringstream dup(R"({"id":4,"src":1,"dst":2,"t":1,"attrs":[]}
{"id":4,"src":1,"dst":2,"t":2,"attrs":[]}
)");
  EXPECT_THROW((void)load_events(dup, DatasetFormat::EventsJsonl), DataError);
}

TEST(DatasetFormat, ParsesTags) {
  EXPECT_EQ(parse_dataset_format("jodie-csv"), DatasetFormat::JodieCsv);
  EXPECT_EQ(parse_dataset_format("events-jsonl"), DatasetFormat::EventsJsonl);
  EXPECT_THROW(parse_dataset_format("parquet"), InvalidArgument);
}

TEST(EventStore, TiesBrokenByIdAndIndexHoldsIncidentEvents) {
  EventStore store({make_event(5, 0, 1, 2.0), make_event(3, 1, 2, 2.0), make_event(9, 2, std::nullopt, 1.0)});
  ASSERT_EQ(store.size(), 3u);
  EXPECT_EQ(store.at(0).id, 9);
  EXPECT_EQ(store.at(1).id, 3);
  EXPECT_EQ(store.at(2).id, 5);
  EXPECT_EQ(store.incident_events(1), (std::vector<EventId>{3, 5}));
  EXPECT_EQ(store.incident_events(2), (std::vector<EventId>{9, 3}));
  EXPECT_TRUE(store.incident_events(42).empty());
}

TEST(EventStore, NodeIndexMatchesIncidenceExactly) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EventStore store = testing::random_store(seed, 20, 6);
    for (NodeId node = 0; node < 6; ++node) {
      std::vector<EventId> expected;
      for (const Event& ev : store.events()) {
        if (ev.source == node || ev.destination == node) expected.push_back(ev.id);
      }
      EXPECT_EQ(store.incident_events(node), expected) << "seed " << seed << " node " << node;
    }
  }
}

TEST(EventStore, RejectsDuplicateIdsAndMixedAttributeLengths) {
  EXPECT_THROW(EventStore({make_event(1, 0, 1, 1.0), make_event(1, 0, 1, 2.0)}), DataError);
  EXPECT_THROW(EventStore({make_event(1, 0, 1, 1.0, {1.0}), make_event(2, 0, 1, 2.0)}), DataError);
  EXPECT_THROW(EventStore({make_event(1, 0, 1, -1.0)}), DataError);
}

TEST(EventsBefore, BoundaryCases) {
  EventStore store({make_event(0, 0, 1, 1.0), make_event(1, 0, 1, 2.0), make_event(2, 1, 2, 2.0),
                    make_event(3, 2, 3, 3.0)});
  EXPECT_TRUE(store.events_before(1.0).empty());
  EXPECT_EQ(store.events_before(std::numeric_limits<double>::infinity()), (std::vector<EventId>{0, 1, 2, 3}));
  EXPECT_EQ(store.events_before(2.5), (std::vector<EventId>{0, 1, 2}));
  EXPECT_EQ(store.events_before(2.0), (std::vector<EventId>{0}));
}

// a=0, b=1, c=2, d=3
EventStore chain_store() {
  return EventStore({make_event(0, 0, 1, 1.0), make_event(1, 1, 2, 2.0), make_event(2, 2, 3, 3.0)});
}

TEST(ComputationGraph, ChainExample) {
  const EventStore store = chain_store();
  EXPECT_EQ(extract_computation_graph(store, 2, 1).candidate_ids, (std::vector<EventId>{1}));
  EXPECT_EQ(extract_computation_graph(store, 2, 2).candidate_ids, (std::vector<EventId>{0, 1}));
  const auto cg = extract_computation_graph(store, 2, 2);
  EXPECT_EQ(cg.target_event_id, 2);
  EXPECT_DOUBLE_EQ(cg.target_time, 3.0);
  EXPECT_EQ(cg.hops, 2);
}

TEST(ComputationGraph, TargetWithoutHistoryIsEmpty) {
  const EventStore store = chain_store();
  EXPECT_TRUE(extract_computation_graph(store, 0, 3).candidate_ids.empty());
}

TEST(ComputationGraph, ExcludesEventsAtTargetTime) {
  EventStore store({make_event(0, 0, 1, 1.0), make_event(1, 0, 1, 2.0), make_event(2, 0, 1, 2.0)});
  EXPECT_EQ(extract_computation_graph(store, 2, 1).candidate_ids, (std::vector<EventId>{0}));
}

TEST(ComputationGraph, NodeEventsContributeSourceOnly) {
  EventStore store({make_event(0, 5, 6, 1.0), make_event(1, 0, std::nullopt, 2.0), make_event(2, 0, 1, 3.0)});
  EXPECT_EQ(extract_computation_graph(store, 2, 3).candidate_ids, (std::vector<EventId>{1}));
}

TEST(ComputationGraph, Errors) {
  const EventStore store = chain_store();
  EXPECT_THROW((void)extract_computation_graph(store, 99, 1), DataError);
  EXPECT_THROW((void)extract_computation_graph(store, 2, 0), InvalidArgument);
}

// Independent transcription of the hop expansion: rescan the whole store
// every hop.
std::set<EventId> brute_force_candidates(const EventStore& store, EventId target, int hops) {
  const Event& t = store.event(target);
  std::set<NodeId> frontier{t.source};
  if (t.destination) frontier.insert(*t.destination);
  std::set<EventId> out;
  for (int hop = 0; hop < hops; ++hop) {
    std::set<NodeId> grown = frontier;
    for (const Event& ev : store.events()) {
      if (!(ev.timestamp < t.timestamp)) continue;
      const bool touches = frontier.contains(ev.source) || (ev.destination && frontier.contains(*ev.destination));
      if (!touches) continue;
      out.insert(ev.id);
      grown.insert(ev.source);
      if (ev.destination) grown.insert(*ev.destination);
    }
    frontier = grown;
  }
  return out;
}

TEST(ComputationGraphProperty, MatchesBruteForceExpansion) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const EventStore store = testing::random_store(seed, 1 + seed % 20, 3 + seed % 7);
    for (const Event& target : store.events()) {
      for (int hops = 1; hops <= 4; ++hops) {
        const auto cg = extract_computation_graph(store, target.id, hops);
        const std::set<EventId> got(cg.candidate_ids.begin(), cg.candidate_ids.end());
        ASSERT_EQ(got.size(), cg.candidate_ids.size());
        ASSERT_EQ(got, brute_force_candidates(store, target.id, hops))
            << "seed " << seed << " target " << target.id << " hops " << hops;
      }
    }
  }
}

TEST(ComputationGraphProperty, MonotoneCausalAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const EventStore store = testing::random_store(seed + 1000, 20, 8);
    for (const Event& target : store.events()) {
      std::vector<EventId> previous;
      for (int hops = 1; hops <= 5; ++hops) {
        const auto cg = extract_computation_graph(store, target.id, hops);
        EXPECT_EQ(cg.candidate_ids, extract_computation_graph(store, target.id, hops).candidate_ids);
        EXPECT_FALSE(cg.contains(target.id));
        for (EventId id : cg.candidate_ids) EXPECT_LT(store.event(id).timestamp, target.timestamp);
        for (EventId id : previous) EXPECT_TRUE(cg.contains(id)) << "candidate lost when growing hops";
        for (std::size_t i = 1; i < cg.candidate_ids.size(); ++i) {
          EXPECT_LT(store.position(cg.candidate_ids[i - 1]), store.position(cg.candidate_ids[i]));
        }
        previous = cg.candidate_ids;
      }
    }
  }
}

}  // namespace
}  // namespace stx
