#include <cstdlib>

#include "dcsynth/llm_client.hpp"
#include "dcsynth/reflection.hpp"
#include "doctest.h"
#include "stub_server.hpp"
#include "test_support.hpp"

using namespace dcsynth;

namespace {

SimulationResult week(const Scene& s) {
  return simulate(s, synthetic_weather(168), case_study_operations(168, 1, 0.8));
}

bool mentions(const std::string& text, std::string_view phrase) { return text.find(phrase) != std::string::npos; }

}  // namespace

TEST_CASE("downsampling keeps endpoints and the budget") {
  const auto idx = downsample_indices(168);
  CHECK(idx.size() <= 64);
  CHECK(idx.front() == 0);
  CHECK(idx.back() == 167);
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
  CHECK(downsample_indices(10).size() == 10);
  CHECK(downsample_indices(1) == std::vector<std::size_t>{0});
  CHECK(downsample_indices(0).empty());
  for (std::size_t n = 65; n < 400; n += 17) {
    const auto d = downsample_indices(n);
    CHECK(d.size() <= 64);
    CHECK(d.back() == n - 1);
  }
}

TEST_CASE("context: metrics from the full-resolution result") {
  const Scene s = testing::scene_a();
  const auto r = week(s);
  const auto report = check_constraints(s, testing::library_a());
  const TrajectoryContext c = contextualize(r, &report, &s);
  CHECK(c.steps.size() <= 64);
  CHECK(c.t_return_c.size() == 1);
  CHECK(c.t_return_c[0].size() == c.steps.size());
  CHECK(*c.mean_pue == pue(r));
  CHECK(c.failures.empty());
  const std::string text = render_trajectories(c);
  CHECK(mentions(text, "none (no overheating events)"));
}

TEST_CASE("failure events are passed through verbatim") {
  const Scene s = testing::scene_a(40, 2);
  const auto r = simulate(s, testing::constant_weather(24), constant_operations(24, {1.0, 25.0, 0.1}));
  REQUIRE_FALSE(r.failures.empty());
  const TrajectoryContext c = contextualize(r);
  REQUIRE(c.failures.size() == r.failures.size());
  for (std::size_t i = 0; i < r.failures.size(); ++i) {
    CHECK(c.failures[i].step == r.failures[i].step);
    CHECK(c.failures[i].kind == r.failures[i].kind);
    CHECK(c.failures[i].magnitude == r.failures[i].magnitude);
  }
  CHECK(mentions(render_trajectories(c), "overheat"));
}

TEST_CASE("reflect prompt") {
  const Scene s = testing::scene_a();
  const TrajectoryContext c = contextualize(week(s));
  const std::string p = build_reflect_prompt(c, "DESIGN-TEXT", "REQ-TEXT");
  CHECK(mentions(p, "Is there any overheating issue?"));
  CHECK(mentions(p, "DESIGN-TEXT"));
  CHECK(mentions(p, "REQ-TEXT"));
  CHECK(mentions(p, "no overheating events"));
  CHECK(p == build_reflect_prompt(c, "DESIGN-TEXT", "REQ-TEXT"));
}

TEST_CASE("cooling violation asks for more ACUs") {
  AcuSpec small = testing::acu_a();
  small.id = "ACU_S";
  small.cooling_capacity_kw = 10.0;
  const AssetLibrary lib({small, testing::rack_a(), testing::server_a(), testing::chiller_a(), testing::tower_a()});
  SceneTopology t = testing::topology_a();
  t.rooms["hall_1"].acus = {{"ACU_S", 2}};
  const Scene s = synthesize_scene(t, testing::layout_a(), lib);
  const auto report = check_constraints(s, lib);
  const TrajectoryContext c = contextualize(week(s), &report, &s);
  const ReflectionOutput out = reflect_rulebased(c, requirements_for_scale(Scale::SmallEdge));
  CHECK(out.provenance == "rulebased");
  CHECK(mentions(out.suggestions, directive::kMoreAcus));
  CHECK(mentions(out.suggestions, "hall_1"));
}

TEST_CASE("efficiency verdict against the target") {
  TrajectoryContext c;
  c.rooms = {"hall_1"};
  c.mean_pue = 1.15;
  c.mean_it_kw = 100;
  c.mean_fans_kw = 5;
  c.mean_chillers_kw = 10;
  Requirements req = requirements_for_scale(Scale::SmallEdge);
  req.target_pue = 1.3;
  const ReflectionOutput ok = reflect_rulebased(c, req);
  CHECK(mentions(ok.summary, "meets target"));
  CHECK(ok.pue == 1.15);
  c.mean_pue = 1.45;
  const ReflectionOutput hot = reflect_rulebased(c, req);
  CHECK(mentions(hot.summary, "above target"));
  // chillers dominate the cooling overhead
  CHECK(mentions(hot.suggestions, directive::kEfficientChiller));
  CHECK(reflect_rulebased(c, req).text() == hot.text());
}

TEST_CASE("nothing to fix keeps the design") {
  const Scene s = testing::scene_a();
  const auto report = check_constraints(s, testing::library_a());
  const TrajectoryContext c = contextualize(week(s), &report, &s);
  Requirements req = requirements_for_scale(Scale::SmallEdge);
  req.target_pue = 3.0;
  const ReflectionOutput out = reflect_rulebased(c, req);
  CHECK_FALSE(mentions(out.suggestions, directive::kMoreAcus));
}

TEST_CASE("llm reflection passes the stub text through, falls back on errors") {
  ::setenv("DCSYNTH_TEST_TOKEN", "t", 1);
  const std::string reply = "No overheating. PUE is fine. Keep the design.";
  testing::StubServer server([&](int) { return testing::StubServer::Reply{200, reply}; });
  LlmEndpointConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model = "stub";
  cfg.token_env = "DCSYNTH_TEST_TOKEN";
  cfg.max_retries = 0;
  cfg.backoff_s = 0.01;
  const Scene s = testing::scene_a();
  const TrajectoryContext c = contextualize(week(s));
  const Requirements req = requirements_for_scale(Scale::SmallEdge);
  const ReflectionOutput out = reflect_llm(c, req, "design", ChatClient(cfg));
  CHECK(out.provenance == "llm");
  CHECK(out.text() == reply);
  REQUIRE(server.prompts().size() == 1);
  CHECK(mentions(server.prompts()[0], "Is there any overheating issue?"));

  cfg.base_url = "http://127.0.0.1:1/v1";
  const ReflectionOutput fb = reflect_llm(c, req, "design", ChatClient(cfg));
  CHECK(fb.provenance == "rulebased (llm fallback: endpoint_unreachable)");
  CHECK(fb.text() == reflect_rulebased(c, req).text());
  ::unsetenv("DCSYNTH_TEST_TOKEN");
}
