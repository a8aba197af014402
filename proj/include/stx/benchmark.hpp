#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "stx/annealer.hpp"

namespace stx {

enum class InstanceFrame { All, Labeled };

InstanceFrame parse_instance_frame(const std::string& name);

struct BenchmarkOptions {
  std::size_t instances = 100;
  std::vector<std::size_t> sizes;  // fixed-size (2-stage) runs
  std::vector<double> lambdas;     // free-size (3-stage) runs, one per lambda
  int hops = 2;
  InstanceFrame frame = InstanceFrame::All;
  std::size_t jobs = 1;
  // Iterations, temperature, cooling, move mix, seed and the initial size of
  // free-size runs come from here.
  SearchConfig search;
};

struct InstanceRun {
  std::size_t instance = 0;
  EventId target = 0;
  bool free_size = false;
  std::size_t requested_size = 0;
  SearchConfig config;  // exact configuration used, including the derived seed
  ExplainResult result;
};

struct SummaryRow {
  std::string mode;  // "fixed" or "free"
  std::size_t size = 0;
  double lambda = 0.0;
  std::size_t instances = 0;
  double mean_mae = 0.0;
  double mean_alpha_fid = 0.0;
  double mean_size = 0.0;
};

struct BenchmarkResult {
  std::vector<EventId> targets;
  std::vector<InstanceRun> runs;  // instance-major, sizes first then lambdas
  std::vector<SummaryRow> rows;
};

/// Picks up to `count` targets uniformly at random from the frame, skipping
/// events whose computation graph has fewer than 2 candidates.
std::vector<EventId> sample_instances(const EventStore& store, std::size_t count, int hops, InstanceFrame frame,
                                      std::uint64_t seed);

/// Runs every configured search on every sampled instance. Instance k uses
/// RNG stream k of the base seed, so results do not depend on `jobs`.
/// Instances run concurrently only when the oracle is reentrant.
BenchmarkResult run_benchmark(const ModelOracle& oracle, const EventStore& store, const BenchmarkOptions& options);

std::vector<SummaryRow> summarize(const std::vector<InstanceRun>& runs, const BenchmarkOptions& options);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
nlohmann::ordered_json summary_json(const std::vector<SummaryRow>& rows);
/// One JSON line per run, carrying the explanation document plus instance,
/// mode and requested_size.
void write_instance_documents(std::ostream& out, const std::vector<InstanceRun>& runs);

}  // namespace stx
