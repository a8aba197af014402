#include "stx/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "stx/benchmark.hpp"
#include "stx/bridge_client.hpp"
#include "stx/error.hpp"
#include "stx/explanation_io.hpp"
#include "stx/synthetic.hpp"

namespace stx::cli {

namespace {

namespace fs = std::filesystem;

struct SharedArgs {
  std::string data;
  std::string format;
  std::string model = "builtin:planted";
  std::string truth;
  long long user_count = -1;
  int hops = 2;
  std::size_t size = 20;
  int stages = 3;
  double lambda = 0.1;
  int iters = 500;
  double t0 = 1.0;
  double cooling = 0.99;
  std::uint64_t seed = 0;
  std::string out;
  bool trace = false;
};

void add_shared(CLI::App& cmd, SharedArgs& a) {
  cmd.add_option("--data", a.data, "Dataset file")->required();
  cmd.add_option("--format", a.format, "Dataset format: jodie-csv or events-jsonl (default: by extension)")
      ->check(CLI::IsMember({"jodie-csv", "events-jsonl"}));
  cmd.add_option("--model", a.model, "builtin:planted or bridge:tcp:<host>:<port> or bridge:cmd:<command>")
      ->capture_default_str();
  cmd.add_option("--truth", a.truth, "Ground-truth sidecar for builtin:planted (default: <data>.truth.json)");
  cmd.add_option("--user-count", a.user_count, "Item id offset for jodie-csv (default: max user id + 1)");
  cmd.add_option("--hops", a.hops, "Message-passing hops of the computation graph")->capture_default_str();
  cmd.add_option("--size", a.size, "Explanation size (initial size in 3-stage mode)")->capture_default_str();
  cmd.add_option("--stages", a.stages, "Search stages (1, 2 or 3)")
      ->check(CLI::IsMember({1, 2, 3}))
      ->capture_default_str();
  cmd.add_option("--lambda", a.lambda, "Sparsity weight of stage 3")->capture_default_str();
  cmd.add_option("--iters", a.iters, "Iterations per stage")->capture_default_str();
  cmd.add_option("--t0", a.t0, "Initial temperature")->capture_default_str();
  cmd.add_option("--cooling", a.cooling, "Geometric cooling rate per iteration")->capture_default_str();
  cmd.add_option("--seed", a.seed, "Random seed")->capture_default_str();
  cmd.add_option("--out", a.out, "Output file (default: standard output)");
  cmd.add_flag("--trace", a.trace, "Include the per-iteration search trace");
}

SearchConfig search_config(const SharedArgs& a) {
  SearchConfig c;
  c.size = a.size;
  c.stages = a.stages;
  c.lambda = a.lambda;
  c.iterations_per_stage = a.iters;
  c.t0 = a.t0;
  c.cooling = a.cooling;
  c.seed = a.seed;
  c.validate();
  return c;
}

DatasetFormat resolve_format(const SharedArgs& a) {
  if (!a.format.empty()) return parse_dataset_format(a.format);
  return fs::path(a.data).extension() == ".csv" ? DatasetFormat::JodieCsv : DatasetFormat::EventsJsonl;
}

EventStore load_dataset(const SharedArgs& a) {
  LoadOptions opts;
  if (a.user_count >= 0) opts.user_count = a.user_count;
  return load_events_file(a.data, resolve_format(a), opts);
}

std::unique_ptr<ModelOracle> resolve_oracle(const SharedArgs& a, const EventStore& store) {
  if (a.model == "builtin:planted") {
    const std::string truth = a.truth.empty() ? a.data + ".truth.json" : a.truth;
    return std::make_unique<PlantedOracle>(read_ground_truth(truth));
  }
  if (a.model.starts_with("bridge:")) {
    const auto endpoint = BridgeEndpoint::parse(std::string_view(a.model).substr(7));
    auto oracle = std::make_unique<BridgeOracle>(endpoint, bridge_timeout_from_env());
    if (oracle->attribute_dim() != store.attribute_dim()) {
      throw OracleError("bridge model expects " + std::to_string(oracle->attribute_dim()) +
                        " attributes, dataset has " + std::to_string(store.attribute_dim()));
    }
    return oracle;
  }
  throw InvalidArgument("unknown model '" + a.model + "' (expected builtin:planted or bridge:...)");
}

/// Output sink that is either a file or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw DataError("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int cmd_explain(const SharedArgs& a, EventId target, std::ostream& out) {
  const SearchConfig config = search_config(a);
  const EventStore store = load_dataset(a);
  const auto oracle = resolve_oracle(a, store);
  const ComputationGraph cg = extract_computation_graph(store, target, a.hops);
  const ExplainResult result = explain(*oracle, store, cg, config);
  Sink sink(a.out, out);
  sink.get() << explanation_document(target, result, config, a.trace).dump() << '\n';
  return kOk;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw InvalidArgument(std::string("invalid ") + what + " '" + item + "'");
    values.push_back(v);
  }
  return values;
}

struct BenchArgs {
  std::size_t instances = 100;
  std::string sizes;
  std::string lambdas;
  std::size_t jobs = 1;
  std::string frame = "all";
  std::string details;
  std::string summary_format;
};

int cmd_benchmark(const SharedArgs& a, const BenchArgs& b, std::ostream& out, std::ostream& err) {
  BenchmarkOptions opts;
  opts.instances = b.instances;
  if (b.instances == 0) throw InvalidArgument("--instances must be positive");
  opts.sizes = parse_list<std::size_t>(b.sizes, "size");
  opts.lambdas = parse_list<double>(b.lambdas, "lambda");
  opts.hops = a.hops;
  opts.frame = parse_instance_frame(b.frame);
  opts.jobs = b.jobs;
  opts.search = search_config(a);
  if (a.hops < 1) throw InvalidArgument("--hops must be >= 1");
  if (opts.sizes.empty() && opts.lambdas.empty()) throw InvalidArgument("give --sizes and/or --lambdas");

  std::string format = b.summary_format;
  if (format.empty()) format = fs::path(a.out).extension() == ".json" ? "json" : "csv";
  if (format != "csv" && format != "json") throw InvalidArgument("--summary-format must be csv or json");

  const EventStore store = load_dataset(a);
  const auto oracle = resolve_oracle(a, store);
  if (opts.jobs > 1 && !oracle->reentrant()) {
    err << "note: oracle is not reentrant, running instances sequentially\n";
  }
  const BenchmarkResult result = run_benchmark(*oracle, store, opts);
  if (result.targets.size() < opts.instances) {
    err << "note: only " << result.targets.size() << " eligible instances available\n";
  }

  Sink sink(a.out, out);
  if (format == "csv") {
    write_summary_csv(sink.get(), result.rows);
  } else {
    sink.get() << summary_json(result.rows).dump(2) << '\n';
  }
  const std::string details = !b.details.empty() ? b.details : (a.out.empty() ? "" : a.out + ".instances.jsonl");
  if (!details.empty()) {
    Sink detail_sink(details, out);
    write_instance_documents(detail_sink.get(), result.runs);
  }
  return kOk;
}

struct SynthArgs {
  std::size_t events = 100;
  std::size_t nodes = 20;
  std::size_t planted = 5;
  std::size_t pairs = 1;
  double noise = 0.0;
  double bias = 0.1;
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::string out = "synth.jsonl";
  std::string truth;
};

int cmd_synth(const SynthArgs& s, std::ostream& err) {
  PlantedSpec spec = random_planted_spec(s.events, s.nodes, s.planted, s.pairs, s.noise, s.seed);
  spec.bias = s.bias;
  if (s.tau > 0.0) spec.tau = s.tau;
  const SyntheticInstance inst = generate(spec);
  const std::string truth_path = s.truth.empty() ? s.out + ".truth.json" : s.truth;
  {
    Sink data(s.out, err);
    write_events_jsonl(data.get(), inst.store);
  }
  {
    Sink truth(truth_path, err);
    write_ground_truth(truth.get(), inst.model);
  }
  err << "wrote " << inst.store.size() << " events (target " << inst.target << ") to " << s.out << ", "
      << inst.truth.important_ids.size() << " important ids to " << truth_path << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explain predictions of continuous-time dynamic graph models by simulated annealing"};
  app.name("stx");
  app.require_subcommand(1);

  SharedArgs explain_args;
  long long target = -1;
  auto* explain_cmd = app.add_subcommand("explain", "Explain one target event");
  add_shared(*explain_cmd, explain_args);
  explain_cmd->add_option("--target", target, "Target event id")->required();

  SharedArgs bench_args;
  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Explain a random sample of targets and summarize");
  add_shared(*bench_cmd, bench_args);
  bench_cmd->add_option("--instances", bench.instances, "Number of sampled targets")->capture_default_str();
  bench_cmd->add_option("--sizes", bench.sizes, "Comma-separated fixed explanation sizes (2-stage runs)");
  bench_cmd->add_option("--lambdas", bench.lambdas, "Comma-separated lambda values (3-stage runs)");
  bench_cmd->add_option("--jobs", bench.jobs, "Parallel instances (reentrant oracles only)")->capture_default_str();
  bench_cmd->add_option("--instance-frame", bench.frame, "Sampling frame: all or labeled")
      ->check(CLI::IsMember({"all", "labeled"}))
      ->capture_default_str();
  bench_cmd->add_option("--details", bench.details, "Per-instance JSONL (default: <out>.instances.jsonl)");
  bench_cmd->add_option("--summary-format", bench.summary_format, "csv or json (default: by --out extension)");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-truth dataset");
  synth_cmd->add_option("--events", synth.events, "Events before the target")->capture_default_str();
  synth_cmd->add_option("--nodes", synth.nodes, "Node count")->capture_default_str();
  synth_cmd->add_option("--planted", synth.planted, "Planted singleton events")->capture_default_str();
  synth_cmd->add_option("--pairs", synth.pairs, "Planted dependent pairs")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Noise scale of unplanted events")->capture_default_str();
  synth_cmd->add_option("--bias", synth.bias, "Model bias")->capture_default_str();
  synth_cmd->add_option("--tau", synth.tau, "Decay constant (default: events / 2)");
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Dataset path")->capture_default_str();
  synth_cmd->add_option("--truth", synth.truth, "Ground-truth path (default: <out>.truth.json)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kUsage;
  }

  try {
    if (*explain_cmd) return cmd_explain(explain_args, target, out);
    if (*bench_cmd) return cmd_benchmark(bench_args, bench, out, err);
    if (*synth_cmd) return cmd_synth(synth, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const OracleError& e) {
    err << "oracle error: " << e.what() << '\n';
    return kOracleError;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace stx::cli
