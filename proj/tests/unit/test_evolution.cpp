#include <algorithm>
#include <atomic>
#include <sstream>

#include "dcsynth/error.hpp"
#include "dcsynth/evolution.hpp"
#include "dcsynth/random.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dcsynth;

namespace {

struct Fixture {
  AssetLibrary library = generate_synthetic_library(10, 2024);
  Requirements requirements = requirements_for_scale(Scale::SmallEdge);
  std::vector<WeatherRecord> weather = synthetic_weather(48);
  std::vector<OperatingPoint> ops = case_study_operations(48, 1, 0.8);

  RunInputs inputs() const { return {library, requirements, weather, ops}; }
};

RunConfig small_config(std::string_view method, int m = 2, int n = 3, int k = 3) {
  RunConfig c = config_for_method(method);
  c.iterations = m;
  c.samples = n;
  c.topk = k;
  c.optimizer.max_steps = 40;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("heap matches a sorted-list oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t cap = 1 + rng.index(12);
    EvolutionHeap heap(cap);
    std::vector<std::pair<double, std::size_t>> all;
    const std::size_t n = rng.index(40);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse values force ties
      const double pue = 1.0 + 0.05 * static_cast<double>(rng.index(8));
      HeapEntry e;
      e.pue = pue;
      e.design = std::to_string(i);
      heap.append(e);
      all.push_back({pue, i});
    }
    std::stable_sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first < b.first; });
    all.resize(std::min(all.size(), cap));
    REQUIRE(heap.size() == all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      CHECK(heap.entries()[i].pue == all[i].first);
      CHECK(heap.entries()[i].design == std::to_string(all[i].second));
    }
    const auto top = heap.topk(3);
    CHECK(top.size() == std::min<std::size_t>(3, all.size()));
    CHECK(heap.topk(0).empty());
  }
}

TEST_CASE("gsr") {
  std::vector<CandidateRecord> batch(5);
  batch[0].valid = batch[2].valid = batch[4].valid = true;
  CHECK(gsr(batch) == doctest::Approx(0.6));
  try {
    gsr(std::span<const CandidateRecord>{});
    FAIL("expected empty batch error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyBatch);
  }
}

TEST_CASE("method table") {
  CHECK(method_label(config_for_method("full")) == "Full");
  CHECK(method_label(config_for_method("random")) == "Random");
  CHECK(method_label(config_for_method("ea")) == "EA");
  CHECK(method_label(config_for_method("vanilla")) == "Vanilla");
  CHECK(method_label(config_for_method("no-phy")) == "ABL(w/o phy)");
  CHECK(method_label(config_for_method("no-reflect-phy")) == "ABL(w/o reflect, phy)");
  CHECK(method_label(config_for_method("no-design-phy")) == "ABL(w/o design, phy)");
  CHECK(method_label(config_for_method("no-llm")) == "ABL(w/o llm)");
  CHECK(known_methods().size() == 8);
  try {
    config_for_method("bogus");
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("config validation") {
  RunConfig c;
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.samples = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.generator = GeneratorKind::Llm;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.topk = 0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("M = 1, N = 1 random run: one record") {
  const Fixture f;
  const RunReport r = run(small_config("random", 1, 1, 1), f.inputs());
  CHECK(r.candidates.size() == 1);
  CHECK(r.iterations.size() == 1);
  CHECK(r.method == "Random");
}

TEST_CASE("K = 0: every iteration starts fresh") {
  const Fixture f;
  const RunReport none = run(small_config("full", 3, 2, 0), f.inputs());
  for (const auto& c : none.candidates) CHECK(c.note.rfind("parent", 0) != 0);
  const RunReport some = run(small_config("full", 3, 2, 2), f.inputs());
  bool refined_from_parent = false;
  for (const auto& c : some.candidates) refined_from_parent |= c.iteration > 1 && c.note.rfind("parent", 0) == 0;
  CHECK(refined_from_parent);
}

TEST_CASE("runs are reproducible and thread-count independent") {
  const Fixture f;
  RunConfig c = small_config("full");
  const auto a = report_to_json(run(c, f.inputs())).dump();
  const auto b = report_to_json(run(c, f.inputs())).dump();
  CHECK(a == b);
  c.threads = 3;
  CHECK(report_to_json(run(c, f.inputs())).dump() == a);
  c.seed = 2;
  CHECK(report_to_json(run(c, f.inputs())).dump() != a);
}

TEST_CASE("best PUE never rises, heap entries carry one reflection") {
  const Fixture f;
  for (const char* method : {"full", "no-phy", "ea", "no-design-phy"}) {
    CAPTURE(method);
    const RunReport r = run(small_config(method, 4, 3, 2), f.inputs());
    std::optional<double> prev;
    for (const auto& it : r.iterations) {
      if (prev) {
        REQUIRE(it.best_pue.has_value());
        CHECK(*it.best_pue <= *prev);
      }
      if (it.best_pue) prev = it.best_pue;
    }
    if (r.best) {
      CHECK(r.best->pue == *r.best_pue);
      CHECK_FALSE(r.best->reflection.text().empty());
    }
    CHECK(r.max_energy_imbalance < 1e-9);
    for (const auto& c : r.candidates) {
      if (c.valid) CHECK_FALSE(c.reflection.empty());
      if (!c.syntax_valid) CHECK_FALSE(c.valid);
    }
  }
}

TEST_CASE("no reflection: the history text is only the PUE") {
  const Fixture f;
  RunConfig c = small_config("full", 1, 2, 2);
  c.reflection = false;
  const RunReport r = run(c, f.inputs());
  for (const auto& rec : r.candidates) {
    if (!rec.valid) continue;
    CHECK(rec.reflection.rfind("PUE: ", 0) == 0);
    CHECK(rec.reflection_provenance == "none");
  }
}

TEST_CASE("physics refinement is only kept when it helps") {
  const Fixture f;
  const RunReport r = run(small_config("full", 2, 4, 2), f.inputs());
  for (const auto& c : r.candidates) {
    if (!c.refined) continue;
    REQUIRE(c.pue.has_value());
    CHECK(c.valid);
    if (c.initial_pue) CHECK(*c.pue < *c.initial_pue);
  }
}

TEST_CASE("report writers") {
  const Fixture f;
  const RunReport r = run(small_config("no-phy", 2, 2, 1), f.inputs());
  std::ostringstream csv;
  write_report_csv(r, csv);
  CHECK(csv.str().rfind("iteration,candidates,valid,gsr,best_pue,mean_pue\n", 0) == 0);
  const auto j = report_to_json(r);
  CHECK(j["method"] == "ABL(w/o phy)");
  CHECK(j["candidates"].size() == 4);
}

TEST_CASE("benchmark rows") {
  BenchmarkConfig b;
  b.methods = {"random", "no-phy"};
  b.scales = {Scale::SmallEdge};
  b.seeds = {1, 2};
  b.iterations = 1;
  b.samples = 2;
  b.topk = 1;
  b.horizon = 24;
  b.base.threads = 1;
  std::atomic<int> calls{0};
  const auto rows = run_benchmark(b, [&](const BenchmarkRow&) { ++calls; });
  CHECK(rows.size() == 4);
  CHECK(calls == 4);
  std::ostringstream out;
  write_benchmark_csv(rows, out);
  const std::string text = out.str();
  CHECK(text.rfind("method,scale,library_size,seed,best_pue,mean_gsr\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 5) throw Error(ErrorKind::Validation, "boom");
  }));
}
