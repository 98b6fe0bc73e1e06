#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcsynth/generation.hpp"
#include "dcsynth/llm_client.hpp"
#include "dcsynth/optimizer.hpp"
#include "dcsynth/physics.hpp"
#include "dcsynth/reflection.hpp"
#include "dcsynth/scene.hpp"
#include "json.hpp"

namespace dcsynth {

// Runs fn(0..n-1) on up to `threads` workers (0: hardware concurrency). The
// first exception is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct HeapEntry {
  double pue = 0.0;
  std::string design;      // serialized topology (bound models) + layout
  std::string trajectory;  // rendered trajectory context
  ReflectionOutput reflection;
  Scene scene;
  std::size_t sequence = 0;  // insertion order; ties keep the earlier entry first
};

// Archive ranked ascending by PUE, capped by evicting the worst entry.
class EvolutionHeap {
 public:
  explicit EvolutionHeap(std::size_t capacity = 256);

  void append(HeapEntry entry);
  std::vector<HeapEntry> topk(std::size_t k) const;
  const std::vector<HeapEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::size_t capacity_;
  std::size_t next_sequence_ = 0;
  std::vector<HeapEntry> entries_;
};

struct RunConfig {
  int iterations = 5;  // M
  int samples = 5;     // N
  int topk = 5;        // K
  GeneratorKind generator = GeneratorKind::Heuristic;
  // Ablation switches; ignored by the random and ea generators.
  bool design = true;
  bool reflection = true;
  bool physics = true;
  bool direct = false;  // design without feedback (every iteration starts fresh)
  std::uint64_t seed = 1;
  OptimizationConfig optimizer{};
  std::size_t optimizer_horizon = 24;  // leading hours used by the optimizer
  Normalization normalization = Normalization::ZScore;
  int threads = 0;
  std::size_t heap_capacity = 256;
  std::optional<LlmEndpointConfig> llm;

  void validate() const;
};

// "Full", "Random", "EA", "Vanilla", "ABL(w/o phy)", "ABL(w/o reflect, phy)",
// "ABL(w/o design, phy)", "ABL(w/o llm)", ...
std::string method_label(const RunConfig& config);

// Benchmark method ids: full, random, ea, vanilla, no-phy, no-reflect-phy,
// no-design-phy, no-llm.
RunConfig config_for_method(std::string_view method, RunConfig base = {});
std::vector<std::string> known_methods();

struct CandidateRecord {
  int iteration = 0;
  int index = 0;
  std::string generator;
  std::uint64_t seed = 0;
  std::string note;
  bool parse_ok = false;
  std::string error;  // parse / synthesis / simulation error
  bool syntax_valid = false;
  bool valid = false;
  std::vector<std::string> violations;
  std::optional<double> initial_pue;
  std::optional<double> pue;
  bool refined = false;  // the physics-refined scene was kept
  std::map<std::string, std::string> rebinds;  // slot -> new asset id
  std::size_t failure_events = 0;
  double energy_imbalance = 0.0;
  std::string design;
  std::string reflection;
  std::string reflection_provenance;
};

struct IterationMetrics {
  int iteration = 0;
  std::size_t candidates = 0;
  std::size_t valid = 0;
  double gsr = 0.0;
  std::optional<double> best_pue;  // heap best so far
  std::optional<double> mean_pue;  // valid candidates of this iteration
};

struct RunReport {
  std::string method;
  RunConfig config;
  std::vector<IterationMetrics> iterations;
  std::vector<CandidateRecord> candidates;
  std::optional<double> best_pue;
  std::optional<HeapEntry> best;
  double max_energy_imbalance = 0.0;

  double mean_gsr() const;
};

// Valid fraction of a batch. Throws Error(EmptyBatch).
double gsr(std::span<const CandidateRecord> batch);

struct RunInputs {
  const AssetLibrary& library;
  const Requirements& requirements;
  std::span<const WeatherRecord> weather;
  std::span<const OperatingPoint> operations;
};

RunReport run(const RunConfig& config, const RunInputs& inputs);

nlohmann::json report_to_json(const RunReport& report);
void write_report_csv(const RunReport& report, std::ostream& out);

struct BenchmarkConfig {
  std::vector<std::string> methods = {"full", "random", "no-phy"};
  std::vector<Scale> scales = {Scale::SmallEdge, Scale::MediumCluster, Scale::LargeCloud};
  std::vector<std::size_t> library_sizes = {10};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int iterations = 5;
  int samples = 5;
  int topk = 5;
  std::size_t horizon = 168;        // small-edge and medium-cluster
  std::size_t large_horizon = 24;   // large-cloud
  std::uint64_t library_seed = 2024;
  double fan_flow_ratio = 0.8;
  RunConfig base{};
};

struct BenchmarkRow {
  std::string method;
  Scale scale = Scale::SmallEdge;
  std::size_t library_size = 10;
  std::uint64_t seed = 0;
  std::optional<double> best_pue;
  double mean_gsr = 0.0;
  double max_energy_imbalance = 0.0;
  bool best_trace_monotone = true;
};

using BenchmarkProgress = std::function<void(const BenchmarkRow&)>;

std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& config, const BenchmarkProgress& progress = {});
void write_benchmark_csv(std::span<const BenchmarkRow> rows, std::ostream& out);

// Topology with every slot replaced by its bound asset id.
SceneTopology bound_topology(const Scene& scene);

}  // namespace dcsynth
