#include "dcsynth/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "dcsynth/error.hpp"
#include "dcsynth/random.hpp"

namespace dcsynth {

using nlohmann::json;

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, n);
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// Heap

EvolutionHeap::EvolutionHeap(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

void EvolutionHeap::append(HeapEntry entry) {
  entry.sequence = next_sequence_++;
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), entry,
                              [](const HeapEntry& a, const HeapEntry& b) { return a.pue < b.pue; });
  entries_.insert(pos, std::move(entry));
  if (entries_.size() > capacity_) entries_.pop_back();
}

std::vector<HeapEntry> EvolutionHeap::topk(std::size_t k) const {
  const auto n = std::min(k, entries_.size());
  return {entries_.begin(), entries_.begin() + static_cast<long>(n)};
}

// ---------------------------------------------------------------------------
// Configuration

void RunConfig::validate() const {
  if (iterations < 1) throw Error(ErrorKind::Config, "iterations must be >= 1");
  if (samples < 1) throw Error(ErrorKind::Config, "samples must be >= 1");
  if (topk < 0) throw Error(ErrorKind::Config, "topk must be >= 0");
  if (optimizer_horizon < 1) throw Error(ErrorKind::Config, "optimizer_horizon must be >= 1");
  if (heap_capacity < 1) throw Error(ErrorKind::Config, "heap_capacity must be >= 1");
  optimizer.validate();
  if (generator == GeneratorKind::Llm) {
    if (!llm) throw Error(ErrorKind::Config, "generator llm needs an llm endpoint configuration");
    llm->validate();
  }
}

std::string method_label(const RunConfig& c) {
  if (c.generator == GeneratorKind::Random) return "Random";
  if (c.generator == GeneratorKind::Ea) return "EA";
  if (c.direct) return "Vanilla";
  std::vector<std::string> removed;
  if (!c.design) removed.emplace_back("design");
  if (!c.reflection) removed.emplace_back("reflect");
  if (!c.physics) removed.emplace_back("phy");
  if (removed.empty()) return "Full";
  if (!c.design && !c.reflection && c.physics) return "ABL(w/o llm)";
  std::string out = "ABL(w/o ";
  for (std::size_t i = 0; i < removed.size(); ++i) out += (i ? ", " : "") + removed[i];
  return out + ")";
}

std::vector<std::string> known_methods() {
  return {"full", "random", "ea", "vanilla", "no-phy", "no-reflect-phy", "no-design-phy", "no-llm"};
}

RunConfig config_for_method(std::string_view method, RunConfig c) {
  c.design = c.reflection = c.physics = true;
  c.direct = false;
  if (c.generator != GeneratorKind::Llm) c.generator = GeneratorKind::Heuristic;
  if (method == "full") {
  } else if (method == "random") {
    c.generator = GeneratorKind::Random;
    c.reflection = c.physics = false;
  } else if (method == "ea") {
    c.generator = GeneratorKind::Ea;
    c.reflection = c.physics = false;
  } else if (method == "vanilla") {
    c.direct = true;
    c.reflection = c.physics = false;
  } else if (method == "no-phy") {
    c.physics = false;
  } else if (method == "no-reflect-phy") {
    c.reflection = c.physics = false;
  } else if (method == "no-design-phy") {
    c.design = c.physics = false;
  } else if (method == "no-llm") {
    c.design = c.reflection = false;
  } else {
    throw Error(ErrorKind::Config, "unknown method '" + std::string(method) + "'");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Reports

double gsr(std::span<const CandidateRecord> batch) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "generation success rate of an empty batch");
  const auto valid = std::count_if(batch.begin(), batch.end(), [](const CandidateRecord& r) { return r.valid; });
  return static_cast<double>(valid) / static_cast<double>(batch.size());
}

double RunReport::mean_gsr() const {
  if (iterations.empty()) return 0.0;
  double s = 0.0;
  for (const auto& it : iterations) s += it.gsr;
  return s / static_cast<double>(iterations.size());
}

SceneTopology bound_topology(const Scene& scene) {
  const auto b = scene.bindings();
  auto id = [&](const std::string& slot) {
    auto it = b.find(slot);
    return it == b.end() ? slot : it->second;
  };
  SceneTopology t;
  for (const auto& [name, room] : scene.topology.rooms) {
    RoomTopology& r = t.rooms[name];
    for (const auto& [slot, n] : room.racks) r.racks[id(slot)] += n;
    for (const auto& [slot, n] : room.acus) r.acus[id(slot)] += n;
  }
  for (const auto& [slot, n] : scene.topology.chillers) t.chillers[id(slot)] += n;
  for (const auto& [slot, n] : scene.topology.towers) t.towers[id(slot)] += n;
  return t;
}

// ---------------------------------------------------------------------------
// Run loop

namespace {

struct Evaluated {
  CandidateRecord record;
  std::optional<HeapEntry> entry;
};

struct RunContext {
  const RunConfig& config;
  const RunInputs& in;
  const SimulationInputs& full;
  const SimulationInputs& opt;
  const ChatClient* client;
};

std::string pue_text(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Evaluated evaluate(const Candidate& cand, const RunContext& ctx) {
  Evaluated ev;
  CandidateRecord& rec = ev.record;
  rec.generator = std::string(to_string(cand.provenance.kind));
  rec.seed = cand.provenance.seed;
  rec.note = cand.provenance.note;
  rec.parse_ok = cand.parse_ok;
  rec.design = cand.provenance.raw_text;
  if (!cand.parse_ok) {
    rec.error = cand.parse_error;
    return ev;
  }
  if (rec.design.empty()) rec.design = serialize_design(*cand.topology, *cand.layout);

  const Requirements& req = ctx.in.requirements;
  Scene scene;
  try {
    scene = synthesize_scene(*cand.topology, *cand.layout, ctx.in.library, req.servers_per_rack, req.server_model);
  } catch (const Error& e) {
    rec.error = e.what();
    return ev;
  }
  auto check = [&](const Scene& sc) {
    ConstraintReport r = check_constraints(sc, ctx.in.library);
    const auto extra = check_requirements(sc, req);
    if (!extra.empty()) r.layout_rules_ok = false;
    r.violations.insert(r.violations.end(), extra.begin(), extra.end());
    return r;
  };
  ConstraintReport report = check(scene);
  rec.syntax_valid = report.syntax_valid;

  std::optional<SimulationResult> sim;
  try {
    sim = simulate(scene, ctx.full);
  } catch (const Error& e) {
    rec.error = e.what();
  }
  if (sim) rec.initial_pue = sim->mean_pue;

  if (ctx.config.physics && sim && sim->mean_pue) {
    try {
      const IdealAssetSet ideal = optimize_parameters(scene, ctx.opt, ctx.in.library, ctx.config.optimizer);
      Scene refined = refine_scene(scene, ideal, ctx.in.library, ctx.config.normalization);
      ConstraintReport refined_report = check(refined);
      SimulationResult refined_sim = simulate(refined, ctx.full);
      const bool keep = refined_report.valid() && refined_sim.mean_pue &&
                        (!report.valid() || *refined_sim.mean_pue < *sim->mean_pue);
      if (keep) {
        const auto before = scene.bindings();
        for (const auto& [slot, id] : refined.bindings()) {
          auto it = before.find(slot);
          if (it == before.end() || it->second != id) rec.rebinds[slot] = id;
        }
        scene = std::move(refined);
        report = std::move(refined_report);
        sim = std::move(refined_sim);
        rec.refined = true;
      }
    } catch (const Error& e) {
      rec.note += (rec.note.empty() ? "" : "; ") + std::string("optimizer: ") + e.what();
    }
  }

  for (const auto& v : report.violations) rec.violations.push_back(v.constraint);
  if (sim) {
    rec.failure_events = sim->failures.size();
    rec.energy_imbalance = max_energy_imbalance(*sim);
    rec.pue = sim->mean_pue;
  }
  rec.valid = report.valid() && sim && sim->mean_pue.has_value();
  if (!rec.valid) return ev;

  const TrajectoryContext context = contextualize(*sim, &report, &scene);
  const std::string design = serialize_design(bound_topology(scene), scene.layout);
  ReflectionOutput reflection;
  if (ctx.config.reflection) {
    reflection = ctx.client ? reflect_llm(context, req, design, *ctx.client) : reflect_rulebased(context, req);
  } else {
    reflection.summary = "PUE: " + pue_text(*sim->mean_pue);
    reflection.provenance = "none";
    reflection.pue = *sim->mean_pue;
  }
  rec.reflection = reflection.text();
  rec.reflection_provenance = reflection.provenance;

  HeapEntry entry;
  entry.pue = *sim->mean_pue;
  entry.design = design;
  entry.trajectory = render_trajectories(context);
  entry.reflection = std::move(reflection);
  entry.scene = std::move(scene);
  ev.entry = std::move(entry);
  return ev;
}

std::vector<Candidate> design_batch(const RunContext& ctx, const DesignQuery& base, std::uint64_t seed,
                                    std::span<const HistoryEntry> history) {
  const RunConfig& c = ctx.config;
  if (ctx.client) {
    DesignQuery q = base;
    q.history.assign(history.begin(), history.end());
    const auto texts = ctx.client->complete_batch(build_design_prompt(q), c.samples);
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      Candidate cand = parse_candidate(texts[i]);
      cand.provenance.kind = GeneratorKind::Llm;
      cand.provenance.seed = derive_seed(seed, {i});
      cand.provenance.raw_text = texts[i];
      out.push_back(std::move(cand));
    }
    return out;
  }
  return heuristic_generate(ctx.in.requirements, ctx.in.library, seed, c.samples, history);
}

std::vector<Candidate> mutate_batch(const RunContext& ctx, std::uint64_t seed, std::span<const HeapEntry> parents) {
  std::vector<Candidate> out;
  for (int i = 0; i < ctx.config.samples; ++i) {
    const HeapEntry& p = parents[static_cast<std::size_t>(i) % parents.size()];
    const Candidate parent = parse_candidate(p.design);
    out.push_back(ea_mutate(parent, ctx.in.library, derive_seed(seed, {static_cast<std::uint64_t>(i)})));
  }
  return out;
}

}  // namespace

RunReport run(const RunConfig& config, const RunInputs& in) {
  config.validate();
  in.requirements.validate();
  if (!in.library.usable()) throw Error(ErrorKind::Config, "asset library needs at least one asset per category");
  const SimulationInputs full = make_inputs(in.weather, in.operations);
  const std::size_t horizon = std::min(config.optimizer_horizon, full.steps());
  const SimulationInputs opt = make_inputs(in.weather.subspan(0, horizon), in.operations.subspan(0, horizon));

  std::optional<ChatClient> client;
  if (config.generator == GeneratorKind::Llm) client.emplace(*config.llm);
  const RunContext ctx{config, in, full, opt, client ? &*client : nullptr};

  DesignQuery base;
  if (client) {
    base.assets_lib = assets_context(in.library);
    base.external_inputs = external_context(summarize(in.weather));
    base.requirements = requirements_text(in.requirements);
  }
  const RandomOptions random_options = random_options_for(in.requirements, in.library);

  RunReport report;
  report.method = method_label(config);
  report.config = config;
  EvolutionHeap heap(config.heap_capacity);

  for (int it = 1; it <= config.iterations; ++it) {
    const std::uint64_t seed = derive_seed(config.seed, {static_cast<std::uint64_t>(it)});
    const auto parents = heap.topk(static_cast<std::size_t>(config.topk));
    std::vector<HistoryEntry> history;
    for (const auto& p : parents) history.push_back({p.design, p.trajectory, p.reflection.text(), p.pue});

    std::vector<Candidate> batch;
    switch (config.generator) {
      case GeneratorKind::Random:
        batch = random_generate(in.library, seed, config.samples, random_options);
        break;
      case GeneratorKind::Ea:
        batch = parents.empty() ? random_generate(in.library, seed, config.samples, random_options)
                                : mutate_batch(ctx, seed, parents);
        break;
      default: {
        const bool fresh = parents.empty() || config.direct;
        if (fresh) {
          batch = config.design ? design_batch(ctx, base, seed, {})
                                : random_generate(in.library, seed, config.samples, random_options);
        } else if (config.reflection) {
          batch = design_batch(ctx, base, seed, history);
        } else if (config.design) {
          batch = mutate_batch(ctx, seed, parents);
        } else {
          batch = random_generate(in.library, seed, config.samples, random_options);
        }
      }
    }

    std::vector<Evaluated> results(batch.size());
    parallel_for(batch.size(), config.threads, [&](std::size_t i) { results[i] = evaluate(batch[i], ctx); });

    IterationMetrics m;
    m.iteration = it;
    m.candidates = results.size();
    double pue_sum = 0.0;
    const std::size_t first = report.candidates.size();
    for (std::size_t i = 0; i < results.size(); ++i) {
      auto& r = results[i];
      r.record.iteration = it;
      r.record.index = static_cast<int>(i);
      report.max_energy_imbalance = std::max(report.max_energy_imbalance, r.record.energy_imbalance);
      if (r.record.valid) {
        ++m.valid;
        pue_sum += *r.record.pue;
      }
      if (r.entry) heap.append(std::move(*r.entry));
      report.candidates.push_back(std::move(r.record));
    }
    m.gsr = gsr(std::span<const CandidateRecord>(report.candidates).subspan(first));
    if (m.valid > 0) m.mean_pue = pue_sum / static_cast<double>(m.valid);
    if (!heap.empty()) m.best_pue = heap.entries().front().pue;
    report.iterations.push_back(m);
  }
  if (!heap.empty()) {
    report.best = heap.entries().front();
    report.best_pue = report.best->pue;
  }
  return report;
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json report_to_json(const RunReport& r) {
  json j;
  j["method"] = r.method;
  const RunConfig& c = r.config;
  j["config"] = {{"iterations", c.iterations},
                 {"samples", c.samples},
                 {"topk", c.topk},
                 {"generator", std::string(to_string(c.generator))},
                 {"design", c.design},
                 {"reflection", c.reflection},
                 {"physics", c.physics},
                 {"direct", c.direct},
                 {"seed", c.seed},
                 {"optimizer_horizon", c.optimizer_horizon},
                 {"normalization", c.normalization == Normalization::ZScore ? "zscore" : "raw"}};
  j["iterations"] = json::array();
  for (const auto& m : r.iterations) {
    j["iterations"].push_back({{"iteration", m.iteration},
                               {"candidates", m.candidates},
                               {"valid", m.valid},
                               {"gsr", m.gsr},
                               {"best_pue", opt_json(m.best_pue)},
                               {"mean_pue", opt_json(m.mean_pue)}});
  }
  j["candidates"] = json::array();
  for (const auto& rec : r.candidates) {
    j["candidates"].push_back({{"iteration", rec.iteration},
                               {"index", rec.index},
                               {"generator", rec.generator},
                               {"seed", rec.seed},
                               {"note", rec.note},
                               {"parse_ok", rec.parse_ok},
                               {"error", rec.error},
                               {"syntax_valid", rec.syntax_valid},
                               {"valid", rec.valid},
                               {"violations", rec.violations},
                               {"initial_pue", opt_json(rec.initial_pue)},
                               {"pue", opt_json(rec.pue)},
                               {"refined", rec.refined},
                               {"rebinds", rec.rebinds},
                               {"failure_events", rec.failure_events},
                               {"design", rec.design},
                               {"reflection", rec.reflection},
                               {"reflection_provenance", rec.reflection_provenance}});
  }
  j["mean_gsr"] = r.mean_gsr();
  j["best_pue"] = opt_json(r.best_pue);
  j["max_energy_imbalance"] = r.max_energy_imbalance;
  if (r.best) {
    j["best"] = {{"pue", r.best->pue},
                 {"design", r.best->design},
                 {"reflection", r.best->reflection.text()},
                 {"scene", scene_to_json(r.best->scene)}};
  } else {
    j["best"] = nullptr;
  }
  return j;
}

void write_report_csv(const RunReport& r, std::ostream& out) {
  out << "iteration,candidates,valid,gsr,best_pue,mean_pue\n";
  out.precision(10);
  for (const auto& m : r.iterations) {
    out << m.iteration << ',' << m.candidates << ',' << m.valid << ',' << m.gsr << ',';
    if (m.best_pue) out << *m.best_pue;
    out << ',';
    if (m.mean_pue) out << *m.mean_pue;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Benchmark

std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& bc, const BenchmarkProgress& progress) {
  for (const auto& m : bc.methods) config_for_method(m, bc.base);
  std::vector<BenchmarkRow> rows;
  for (Scale scale : bc.scales) {
    const Requirements req = requirements_for_scale(scale);
    const std::size_t hours = scale == Scale::LargeCloud ? bc.large_horizon : bc.horizon;
    const auto weather = synthetic_weather(hours);
    for (std::size_t lib_size : bc.library_sizes) {
      const AssetLibrary library = generate_synthetic_library(lib_size, bc.library_seed);
      for (std::uint64_t seed : bc.seeds) {
        const auto ops = case_study_operations(hours, seed, bc.fan_flow_ratio);
        for (const auto& method : bc.methods) {
          RunConfig cfg = config_for_method(method, bc.base);
          cfg.iterations = bc.iterations;
          cfg.samples = bc.samples;
          cfg.topk = bc.topk;
          cfg.seed = seed;
          const RunReport rep = run(cfg, RunInputs{library, req, weather, ops});
          BenchmarkRow row;
          row.method = rep.method;
          row.scale = scale;
          row.library_size = lib_size;
          row.seed = seed;
          row.best_pue = rep.best_pue;
          row.mean_gsr = rep.mean_gsr();
          row.max_energy_imbalance = rep.max_energy_imbalance;
          double prev = std::numeric_limits<double>::infinity();
          for (const auto& m : rep.iterations) {
            if (!m.best_pue) continue;
            if (*m.best_pue > prev) row.best_trace_monotone = false;
            prev = *m.best_pue;
          }
          if (progress) progress(row);
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

void write_benchmark_csv(std::span<const BenchmarkRow> rows, std::ostream& out) {
  out << "method,scale,library_size,seed,best_pue,mean_gsr\n";
  out.precision(10);
  for (const auto& r : rows) {
    const bool quote = r.method.find(',') != std::string::npos;
    out << (quote ? "\"" + r.method + "\"" : r.method) << ',' << to_string(r.scale) << ',' << r.library_size << ','
        << r.seed << ',';
    if (r.best_pue) out << *r.best_pue;
    out << ',' << r.mean_gsr << '\n';
  }
}

}  // namespace dcsynth
