#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "stx/annealer.hpp"
#include "stx/bridge_client.hpp"
#include "stx/cli.hpp"
#include "stx/error.hpp"
#include "stx/metrics.hpp"
#include "stx/synthetic.hpp"

namespace py = pybind11;
using namespace stx;

namespace {

py::dict event_dict(const Event& ev) {
  py::dict d;
  d["id"] = ev.id;
  d["src"] = ev.source;
  d["dst"] = ev.destination ? py::cast(*ev.destination) : py::none();
  d["t"] = ev.timestamp;
  d["attrs"] = ev.attributes;
  d["label"] = ev.label ? py::cast(*ev.label) : py::none();
  return d;
}

Event event_from_dict(const py::dict& d) {
  Event ev;
  ev.id = d["id"].cast<EventId>();
  ev.source = d["src"].cast<NodeId>();
  if (d.contains("dst") && !d["dst"].is_none()) ev.destination = d["dst"].cast<NodeId>();
  ev.timestamp = d["t"].cast<double>();
  if (d.contains("attrs")) ev.attributes = d["attrs"].cast<std::vector<double>>();
  if (d.contains("label") && !d["label"].is_none()) ev.label = d["label"].cast<std::int64_t>();
  return ev;
}

py::list trace_list(const SearchTrace& trace) {
  py::list out;
  for (const auto& r : trace) {
    py::dict d;
    d["stage"] = r.stage;
    d["iteration"] = r.iteration;
    d["temperature"] = r.temperature;
    d["objective"] = r.proposed_objective;
    d["accepted"] = r.accepted;
    d["size"] = r.size;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Temporal-graph explanation search core";

  auto base_error = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base_error.ptr());
  py::register_exception<DataError>(m, "DataError", base_error.ptr());
  py::register_exception<OracleError>(m, "OracleError", base_error.ptr());

  py::class_<EventStore>(m, "EventStore")
      .def(py::init([](const py::list& events) {
             std::vector<Event> out;
             for (const auto& e : events) out.push_back(event_from_dict(e.cast<py::dict>()));
             return EventStore(std::move(out));
           }),
           py::arg("events"))
      .def("__len__", &EventStore::size)
      .def_property_readonly("attribute_dim", &EventStore::attribute_dim)
      .def("__contains__", &EventStore::contains)
      .def("event", [](const EventStore& s, EventId id) { return event_dict(s.event(id)); })
      .def("events", [](const EventStore& s) {
        py::list out;
        for (const Event& ev : s.events()) out.append(event_dict(ev));
        return out;
      })
      .def("ids", [](const EventStore& s) {
        std::vector<EventId> ids;
        for (const Event& ev : s.events()) ids.push_back(ev.id);
        return ids;
      })
      .def("incident_events", &EventStore::incident_events, py::arg("node"))
      .def("events_before", &EventStore::events_before, py::arg("t"));

  m.def(
      "load_events",
      [](const std::filesystem::path& path, const std::string& format, std::optional<std::size_t> user_count) {
        LoadOptions opts;
        opts.user_count = user_count;
        return load_events_file(path, parse_dataset_format(format), opts);
      },
      py::arg("path"), py::arg("format") = "events-jsonl", py::arg("user_count") = py::none());

  py::class_<ComputationGraph>(m, "ComputationGraph")
      .def_readonly("target_event_id", &ComputationGraph::target_event_id)
      .def_readonly("target_time", &ComputationGraph::target_time)
      .def_readonly("hops", &ComputationGraph::hops)
      .def_readonly("candidate_ids", &ComputationGraph::candidate_ids)
      .def("__len__", &ComputationGraph::size)
      .def("__contains__", &ComputationGraph::contains);
  m.def("extract_computation_graph", &extract_computation_graph, py::arg("store"), py::arg("target"),
        py::arg("hops") = 2);

  py::enum_<TaskKind>(m, "TaskKind")
      .value("ENTITY_BINARY", TaskKind::EntityBinary)
      .value("ENTITY_MULTICLASS", TaskKind::EntityMulticlass)
      .value("GRAPH_MULTICLASS", TaskKind::GraphMulticlass)
      .value("ENTITY_REGRESSION", TaskKind::EntityRegression)
      .value("GRAPH_REGRESSION", TaskKind::GraphRegression);
  py::class_<TaskSpec>(m, "TaskSpec")
      .def(py::init([](TaskKind kind, std::size_t width) {
             TaskSpec t{kind, width};
             t.validate();
             return t;
           }),
           py::arg("kind"), py::arg("width") = 1)
      .def_readonly("kind", &TaskSpec::kind)
      .def_readonly("width", &TaskSpec::width)
      .def("__eq__", [](const TaskSpec& a, const TaskSpec& b) { return a == b; });

  m.def("prediction_distance",
        [](const TaskSpec& task, const std::vector<double>& a, const std::vector<double>& b) {
          return prediction_distance(Prediction{task, a, {}}, Prediction{task, b, {}});
        },
        py::arg("task"), py::arg("a"), py::arg("b"));

  py::class_<ModelOracle>(m, "ModelOracle")
      .def_property_readonly("task", &ModelOracle::task)
      .def_property_readonly("reentrant", &ModelOracle::reentrant)
      .def(
          "predict",
          [](const ModelOracle& o, const EventStore& s, std::vector<EventId> included, EventId target) {
            std::sort(included.begin(), included.end());
            return checked_predict(o, s, included, target).values;
          },
          py::arg("store"), py::arg("included"), py::arg("target"));

  py::class_<CallbackOracle, ModelOracle>(m, "CallbackOracle")
      .def(py::init([](const TaskSpec& task, py::function fn) {
             // Python callables are never reentrant: the GIL serializes them anyway.
             return std::make_unique<CallbackOracle>(
                 task, [fn](std::span<const EventId> ids, EventId target) {
                   py::gil_scoped_acquire gil;
                   return fn(std::vector<EventId>(ids.begin(), ids.end()), target).cast<std::vector<double>>();
                 });
           }),
           py::arg("task"), py::arg("fn"));

  py::class_<BridgeOracle, ModelOracle>(m, "BridgeOracle")
      .def(py::init([](const std::string& endpoint, std::optional<int> timeout_ms) {
             const auto timeout =
                 timeout_ms ? std::chrono::milliseconds(*timeout_ms) : bridge_timeout_from_env();
             return std::make_unique<BridgeOracle>(BridgeEndpoint::parse(endpoint), timeout);
           }),
           py::arg("endpoint"), py::arg("timeout_ms") = py::none())
      .def_property_readonly("attribute_dim", &BridgeOracle::attribute_dim);

  m.attr("ALPHA_FIDELITY_FLOOR") = kAlphaFidelityFloor;
  m.attr("ALPHA_FIDELITY_CAP") = kAlphaFidelityCap;
  m.def("delta_fidelity", &delta_fidelity, py::arg("fid_plus"), py::arg("fid_minus"));
  m.def("alpha_fidelity", &alpha_fidelity, py::arg("fid_plus"), py::arg("fid_minus"));
  m.def("sparsity", &sparsity, py::arg("explanation_size"), py::arg("graph_size"));

  py::class_<ObjectiveWeights>(m, "ObjectiveWeights")
      .def(py::init([](double epsilon, double gamma, double lambda) {
             ObjectiveWeights w{epsilon, gamma, lambda};
             w.validate();
             return w;
           }),
           py::arg("epsilon") = 1.0, py::arg("gamma") = 0.0, py::arg("lambda_") = 0.0)
      .def_readonly("epsilon", &ObjectiveWeights::epsilon)
      .def_readonly("gamma", &ObjectiveWeights::gamma)
      .def_readonly("lambda_", &ObjectiveWeights::lambda);

  py::class_<FidelityReport>(m, "FidelityReport")
      .def_readonly("fid_plus", &FidelityReport::fid_plus)
      .def_readonly("fid_minus", &FidelityReport::fid_minus)
      .def_readonly("delta_fid", &FidelityReport::delta_fid)
      .def_readonly("alpha_fid", &FidelityReport::alpha_fid)
      .def_readonly("sparsity", &FidelityReport::sparsity);
  m.def("objective", &objective, py::arg("report"), py::arg("weights"));

  m.def(
      "fidelity_minus",
      [](const ModelOracle& o, const EventStore& s, const ComputationGraph& cg, const std::vector<EventId>& r) {
        return FidelityEvaluator(o, s, cg).fidelity_minus(r);
      },
      py::arg("oracle"), py::arg("store"), py::arg("graph"), py::arg("explanation"));
  m.def(
      "fidelity_plus",
      [](const ModelOracle& o, const EventStore& s, const ComputationGraph& cg, const std::vector<EventId>& r) {
        return FidelityEvaluator(o, s, cg).fidelity_plus(r);
      },
      py::arg("oracle"), py::arg("store"), py::arg("graph"), py::arg("explanation"));
  m.def(
      "evaluate",
      [](const ModelOracle& o, const EventStore& s, const ComputationGraph& cg, const std::vector<EventId>& r) {
        return FidelityEvaluator(o, s, cg).report(r);
      },
      py::arg("oracle"), py::arg("store"), py::arg("graph"), py::arg("explanation"));

  m.def("accept_probability", &accept_probability, py::arg("l_new"), py::arg("l_old"), py::arg("temperature"));

  py::class_<SearchConfig>(m, "SearchConfig")
      .def(py::init([](std::size_t size, int stages, int iterations, double t0, double cooling, double lambda,
                       std::uint64_t seed) {
             SearchConfig c;
             c.size = size;
             c.stages = stages;
             c.iterations_per_stage = iterations;
             c.t0 = t0;
             c.cooling = cooling;
             c.lambda = lambda;
             c.seed = seed;
             c.validate();
             return c;
           }),
           py::arg("size") = 20, py::arg("stages") = 3, py::arg("iterations") = 500, py::arg("t0") = 1.0,
           py::arg("cooling") = 0.99, py::arg("lambda_") = 0.1, py::arg("seed") = 0)
      .def_readwrite("size", &SearchConfig::size)
      .def_readwrite("stages", &SearchConfig::stages)
      .def_readwrite("iterations", &SearchConfig::iterations_per_stage)
      .def_readwrite("t0", &SearchConfig::t0)
      .def_readwrite("cooling", &SearchConfig::cooling)
      .def_readwrite("lambda_", &SearchConfig::lambda)
      .def_readwrite("seed", &SearchConfig::seed);

  py::class_<Explanation>(m, "Explanation")
      .def_readonly("event_ids", &Explanation::event_ids)
      .def_readonly("objective", &Explanation::objective_value)
      .def_readonly("report", &Explanation::report)
      .def_readonly("stage", &Explanation::stage);

  py::class_<ExplainResult>(m, "ExplainResult")
      .def_readonly("explanation", &ExplainResult::explanation)
      .def_readonly("stage_bests", &ExplainResult::stage_bests)
      .def_readonly("candidate_count", &ExplainResult::candidate_count)
      .def_readonly("saturated", &ExplainResult::saturated)
      .def_property_readonly("trace", [](const ExplainResult& r) { return trace_list(r.trace); });

  m.def(
      "explain",
      [](const ModelOracle& oracle, const EventStore& store, const ComputationGraph& cg, const SearchConfig& config) {
        // Callback oracles re-acquire the GIL per prediction.
        py::gil_scoped_release release;
        return explain(oracle, store, cg, config);
      },
      py::arg("oracle"), py::arg("store"), py::arg("graph"), py::arg("config") = SearchConfig{});

  py::class_<PlantedModel>(m, "PlantedModel")
      .def_readonly("target", &PlantedModel::target)
      .def_readonly("bias", &PlantedModel::bias)
      .def_readonly("tau", &PlantedModel::tau)
      .def_property_readonly("important_ids", [](const PlantedModel& pm) { return pm.ground_truth().important_ids; })
      .def("to_json", [](const PlantedModel& pm) { return pm.to_json().dump(); });
  m.def("read_ground_truth", &read_ground_truth, py::arg("path"));

  py::class_<PlantedOracle, ModelOracle>(m, "PlantedOracle")
      .def(py::init<PlantedModel>(), py::arg("model"))
      .def_property_readonly("model", &PlantedOracle::model);

  py::class_<SyntheticInstance>(m, "SyntheticInstance")
      .def_readonly("store", &SyntheticInstance::store)
      .def_readonly("target", &SyntheticInstance::target)
      .def_property_readonly("important_ids",
                             [](const SyntheticInstance& s) { return s.truth.important_ids; })
      .def_readonly("model", &SyntheticInstance::model);

  m.def(
      "generate",
      [](std::size_t n_events, std::size_t n_nodes, std::size_t planted, std::size_t pairs, double noise,
         std::uint64_t seed) { return generate(random_planted_spec(n_events, n_nodes, planted, pairs, noise, seed)); },
      py::arg("n_events") = 100, py::arg("n_nodes") = 20, py::arg("planted") = 5, py::arg("pairs") = 1,
      py::arg("noise") = 0.0, py::arg("seed") = 0);

  m.def(
      "recovery_score",
      [](const std::vector<EventId>& explanation, const std::vector<EventId>& truth) {
        const auto s = recovery_score(explanation, GroundTruth{truth});
        return std::make_pair(s.precision, s.recall);
      },
      py::arg("explanation"), py::arg("important_ids"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
