#include "stx/benchmark.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "stx/error.hpp"
#include "stx/explanation_io.hpp"

namespace stx {

using nlohmann::ordered_json;

InstanceFrame parse_instance_frame(const std::string& name) {
  if (name == "all") return InstanceFrame::All;
  if (name == "labeled") return InstanceFrame::Labeled;
  throw InvalidArgument("unknown instance frame '" + name + "' (expected all or labeled)");
}

std::vector<EventId> sample_instances(const EventStore& store, std::size_t count, int hops, InstanceFrame frame,
                                      std::uint64_t seed) {
  std::vector<EventId> pool;
  for (const Event& ev : store.events()) {
    if (frame == InstanceFrame::Labeled && !(ev.label && *ev.label != 0)) continue;
    pool.push_back(ev.id);
  }
  // The sampling stream sits at the far end of the stream space, away from
  // the per-instance search streams 0, 1, 2, ...
  Rng rng = Rng::stream(seed, std::numeric_limits<std::uint64_t>::max() - 1);
  std::vector<EventId> picked;
  for (std::size_t i = 0; i < pool.size() && picked.size() < count; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
    if (extract_computation_graph(store, pool[i], hops).size() >= 2) picked.push_back(pool[i]);
  }
  return picked;
}

namespace {

std::vector<InstanceRun> run_instance(const ModelOracle& oracle, const EventStore& store,
                                      const BenchmarkOptions& options, std::size_t instance, EventId target) {
  const ComputationGraph cg = extract_computation_graph(store, target, options.hops);
  const FidelityEvaluator evaluator(oracle, store, cg);
  const std::uint64_t seed = Rng::stream_seed(options.search.seed, instance);

  std::vector<InstanceRun> runs;
  auto run = [&](bool free_size, std::size_t size, int stages, double lambda) {
    InstanceRun r;
    r.instance = instance;
    r.target = target;
    r.free_size = free_size;
    r.requested_size = size;
    r.config = options.search;
    r.config.size = size;
    r.config.stages = stages;
    r.config.lambda = lambda;
    r.config.seed = seed;
    r.result = explain(evaluator, r.config);
    runs.push_back(std::move(r));
  };
  for (std::size_t size : options.sizes) run(false, size, 2, 0.0);
  for (double lambda : options.lambdas) run(true, options.search.size, 3, lambda);
  return runs;
}

}  // namespace

BenchmarkResult run_benchmark(const ModelOracle& oracle, const EventStore& store, const BenchmarkOptions& options) {
  if (options.instances == 0) throw InvalidArgument("instance count must be positive");
  if (options.sizes.empty() && options.lambdas.empty())
    throw InvalidArgument("benchmark needs at least one size or one lambda");
  for (std::size_t s : options.sizes) {
    if (s == 0) throw InvalidArgument("explanation sizes must be >= 1");
  }
  for (double l : options.lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) throw InvalidArgument("lambda values must lie in [0, 1]");
  }
  options.search.validate();

  BenchmarkResult result;
  result.targets = sample_instances(store, options.instances, options.hops, options.frame, options.search.seed);
  if (result.targets.empty()) throw DataError("no eligible target events (all computation graphs have < 2 candidates)");

  const std::size_t n = result.targets.size();
  std::vector<std::vector<InstanceRun>> per_instance(n);
  const std::size_t jobs = oracle.reentrant() ? std::max<std::size_t>(1, std::min(options.jobs, n)) : 1;

  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) per_instance[i] = run_instance(oracle, store, options, i, result.targets[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          per_instance[i] = run_instance(oracle, store, options, i, result.targets[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(n);
          return;
        }
      }
    };
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  for (auto& runs : per_instance) {
    for (auto& r : runs) result.runs.push_back(std::move(r));
  }
  result.rows = summarize(result.runs, options);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<InstanceRun>& runs, const BenchmarkOptions& options) {
  std::vector<SummaryRow> rows;
  auto aggregate = [&](SummaryRow row, auto&& selects) {
    double mae = 0.0, alpha = 0.0, size = 0.0;
    for (const auto& r : runs) {
      if (!selects(r)) continue;
      mae += r.result.explanation.report.fid_minus;
      alpha += r.result.explanation.report.alpha_fid;
      size += static_cast<double>(r.result.explanation.event_ids.size());
      ++row.instances;
    }
    if (row.instances == 0) return;
    const auto count = static_cast<double>(row.instances);
    row.mean_mae = mae / count;
    row.mean_alpha_fid = alpha / count;
    row.mean_size = size / count;
    rows.push_back(row);
  };
  for (std::size_t s : options.sizes) {
    aggregate(SummaryRow{"fixed", s, 0.0, 0, 0, 0, 0},
              [&](const InstanceRun& r) { return !r.free_size && r.requested_size == s; });
  }
  for (double l : options.lambdas) {
    aggregate(SummaryRow{"free", options.search.size, l, 0, 0, 0, 0},
              [&](const InstanceRun& r) { return r.free_size && r.config.lambda == l; });
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "mode,size,lambda,instances,mean_mae,mean_alpha_fid,mean_size\n";
  for (const auto& r : rows) {
    out << r.mode << ',' << r.size << ',' << format_double(r.lambda) << ',' << r.instances << ','
        << format_double(r.mean_mae) << ',' << format_double(r.mean_alpha_fid) << ',' << format_double(r.mean_size)
        << '\n';
  }
}

ordered_json summary_json(const std::vector<SummaryRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    out.push_back(ordered_json{{"mode", r.mode},
                               {"size", r.size},
                               {"lambda", r.lambda},
                               {"instances", r.instances},
                               {"mean_mae", r.mean_mae},
                               {"mean_alpha_fid", r.mean_alpha_fid},
                               {"mean_size", r.mean_size}});
  }
  return out;
}

void write_instance_documents(std::ostream& out, const std::vector<InstanceRun>& runs) {
  for (const auto& r : runs) {
    ordered_json doc;
    doc["instance"] = r.instance;
    doc["mode"] = r.free_size ? "free" : "fixed";
    doc["requested_size"] = r.requested_size;
    doc.update(explanation_document(r.target, r.result, r.config, false));
    out << doc.dump() << '\n';
  }
}

}  // namespace stx
