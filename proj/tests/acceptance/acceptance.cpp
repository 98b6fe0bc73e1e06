// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dcsynth/error.hpp"
#include "dcsynth/evolution.hpp"
#include "dcsynth/generation.hpp"
#include "dcsynth/optimizer.hpp"
#include "dcsynth/physics.hpp"
#include "dcsynth/random.hpp"
#include "dcsynth/scene.hpp"
#include "dcsynth/weather.hpp"
#include "json.hpp"

using namespace dcsynth;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1];
  const double b = v[n / 2];
  if (std::isinf(a) || std::isinf(b)) return std::max(a, b);
  return 0.5 * (a + b);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// First heuristic candidate for the requirement, synthesized.
std::optional<Scene> heuristic_scene(const Requirements& req, const AssetLibrary& lib, std::uint64_t seed) {
  for (const auto& c : heuristic_generate(req, lib, seed, 3)) {
    if (!c.parse_ok) continue;
    Scene s = synthesize_scene(*c.topology, *c.layout, lib, req.servers_per_rack, req.server_model);
    if (check_constraints(s, lib).valid()) return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

void gradient_fidelity() {
  const auto t0 = Clock::now();
  const Requirements req = requirements_for_scale(Scale::SmallEdge);
  int scenes = 0;
  std::size_t partials = 0;
  double worst = 0.0;
  std::string worst_at;
  for (std::uint64_t seed = 1; scenes < 25 && seed < 200; ++seed) {
    const AssetLibrary lib = generate_synthetic_library(10, 1000 + seed);
    std::optional<Scene> scene;
    try {
      scene = heuristic_scene(req, lib, seed);
    } catch (const Error&) {
      continue;
    }
    if (!scene) continue;
    ++scenes;
    const auto inputs = make_inputs(synthetic_weather(24), case_study_operations(24, seed, 0.8));
    const auto handles = optimizable_handles(*scene, lib);
    const auto x = handle_values(*scene, handles);
    const ObjectiveTerms g = evaluate_objective(*scene, inputs, handles, x, true);
    for (std::size_t i = 0; i < handles.size(); ++i) {
      const double range = handles[i].upper - handles[i].lower;
      const double step = 1e-4 * (range > 0 ? range : std::max(1.0, std::abs(x[i])));
      auto lo = x;
      auto hi = x;
      lo[i] -= step;
      hi[i] += step;
      const double fd = (evaluate_objective(*scene, inputs, handles, hi, false).mean_pue -
                         evaluate_objective(*scene, inputs, handles, lo, false).mean_pue) /
                        (2 * step);
      const double e = rel_err(g.d_mean_pue[i], fd, 1e-9);
      ++partials;
      if (e > worst) {
        worst = e;
        worst_at = "seed " + std::to_string(seed) + " " + handles[i].slot + "." + handles[i].field_name;
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, scenes == 25 && worst < 1e-5 && secs < 60.0,
         std::to_string(scenes) + " scenes, " + std::to_string(partials) + " partials, max rel err " + fmt(worst) +
             (worst_at.empty() ? "" : " (" + worst_at + ")") + ", " + fmt(secs, 3) + " s");
}

// ---------------------------------------------------------------------------

std::vector<BenchmarkRow> benchmark_rows;
double benchmark_seconds = 0.0;

void run_suite() {
  BenchmarkConfig b;
  b.methods = {"full", "random", "no-phy"};
  b.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) b.seeds.push_back(s);
  const auto t0 = Clock::now();
  benchmark_rows = run_benchmark(b);
  benchmark_seconds = seconds_since(t0);
}

void energy_bookkeeping() {
  double worst = 0.0;
  for (const auto& r : benchmark_rows) worst = std::max(worst, r.max_energy_imbalance);
  // plus every simulated step of a direct week run in both modes
  const AssetLibrary lib = generate_synthetic_library(10, 2024);
  const auto scene = heuristic_scene(requirements_for_scale(Scale::SmallEdge), lib, 3);
  if (scene) {
    const auto inputs = make_inputs(synthetic_weather(168), case_study_operations(168, 3, 0.8));
    for (SimMode mode : {SimMode::Evaluate, SimMode::Smooth}) {
      worst = std::max(worst, max_energy_imbalance(simulate(*scene, inputs, {mode, {}})));
    }
  }
  report(2, scene.has_value() && worst <= 1e-9,
         std::to_string(benchmark_rows.size()) + " benchmark runs, max relative imbalance " + fmt(worst));
}

// ---------------------------------------------------------------------------

void psychrometrics() {
  const double wb = wet_bulb_stull(20.0, 50.0);
  const double w = humidity_ratio(20.0, 50.0, 101325.0);
  bool ok = std::abs(wb - 13.70) <= 0.02 && std::abs(w - 0.00726) <= 1e-4;
  double worst = 0.0;
  const auto doc = nlohmann::json::parse(slurp(fs::path(FIXTURE_DIR) / "psychrometrics.json"));
  for (const auto& c : doc.at("cases")) {
    const double t = c.at("dry_bulb_c");
    const double rh = c.at("rh_pct");
    const double p = c.at("pressure_pa");
    worst = std::max(worst, std::abs(wet_bulb_stull(t, rh) - c.at("wet_bulb_c").get<double>()));
    worst = std::max(worst, std::abs(humidity_ratio(t, rh, p) - c.at("humidity_ratio").get<double>()));
  }
  ok = ok && worst < 1e-9;
  report(3, ok,
         "wet bulb " + fmt(wb, 6) + " C, humidity ratio " + fmt(w, 6) + ", fixture max abs diff " + fmt(worst) +
             "; regional weather-file check not run (no file supplied)");
}

// ---------------------------------------------------------------------------

std::string brute_nearest(const std::vector<double>& alpha, AssetCategory cat, const AssetLibrary& lib, bool z) {
  const auto assets = lib.assets(cat);
  const std::size_t dim = alpha.size();
  std::vector<double> mu(dim, 0.0);
  std::vector<double> sd(dim, 1.0);
  if (z) {
    for (std::size_t i = 0; i < dim; ++i) {
      double s = 0.0;
      for (const auto& a : assets) s += parameter_vector(a)[i];
      mu[i] = s / assets.size();
      double v = 0.0;
      for (const auto& a : assets) v += std::pow(parameter_vector(a)[i] - mu[i], 2);
      v /= assets.size();
      sd[i] = v > 0 ? std::sqrt(v) : 1.0;
    }
  }
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& a : assets) {
    double d = 0.0;
    const auto p = parameter_vector(a);
    for (std::size_t i = 0; i < dim; ++i) d += std::pow((alpha[i] - p[i]) / sd[i], 2);
    if (d < best_d || (d == best_d && id_of(a) < best)) {
      best_d = d;
      best = id_of(a);
    }
  }
  return best;
}

void nearest_oracle() {
  Rng rng(4242);
  std::size_t trials = 0;
  std::size_t agree = 0;
  for (std::size_t size : {10u, 20u, 30u, 50u}) {
    for (AssetCategory cat : {AssetCategory::Acu, AssetCategory::Chiller, AssetCategory::CoolingTower}) {
      for (int t = 0; t < 1000; ++t) {
        const AssetLibrary lib = generate_synthetic_library(size, static_cast<std::uint64_t>(rng.integer(0, 1LL << 40)));
        const auto assets = lib.assets(cat);
        const auto a = parameter_vector(assets[rng.index(size)]);
        const auto b = parameter_vector(assets[rng.index(size)]);
        std::vector<double> alpha(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) alpha[i] = a[i] + rng.uniform(-0.3, 1.3) * (b[i] - a[i]);
        ++trials;
        agree += id_of(select_nearest(alpha, cat, lib).asset) == brute_nearest(alpha, cat, lib, true);
      }
    }
  }
  report(4, agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " agree");
}

// ---------------------------------------------------------------------------

void table_analogue() {
  std::map<std::pair<std::string, Scale>, std::vector<double>> pues;
  std::map<std::pair<std::string, Scale>, std::vector<double>> gsrs;
  for (const auto& r : benchmark_rows) {
    pues[{r.method, r.scale}].push_back(r.best_pue.value_or(std::numeric_limits<double>::infinity()));
    gsrs[{r.method, r.scale}].push_back(r.mean_gsr);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
  };
  bool ok = benchmark_seconds < 600.0;
  std::ostringstream detail;
  const auto label = [](std::string_view id) { return method_label(config_for_method(id)); };
  for (Scale sc : kAllScales) {
    const double full = median(pues[{label("full"), sc}]);
    const double rnd = median(pues[{label("random"), sc}]);
    const double nophy = median(pues[{label("no-phy"), sc}]);
    const double g_full = mean(gsrs[{label("full"), sc}]);
    const double g_rnd = mean(gsrs[{label("random"), sc}]);
    const bool seeds_ok = pues[{label("full"), sc}].size() >= 20 && pues[{label("random"), sc}].size() >= 20 &&
                          pues[{label("no-phy"), sc}].size() >= 20;
    const bool a = full < rnd;
    const bool b = g_full > g_rnd;
    const bool c = full <= nophy;
    ok = ok && seeds_ok && a && b && c;
    detail << to_string(sc) << " [PUE full " << fmt(full) << " random " << fmt(rnd) << " no-phy " << fmt(nophy)
           << "; GSR full " << fmt(g_full, 3) << " random " << fmt(g_rnd, 3) << "] ";
  }
  detail << fmt(benchmark_seconds, 3) << " s";
  report(5, ok, detail.str());
}

// ---------------------------------------------------------------------------

void evolution_invariants() {
  Rng rng(777);
  std::size_t mismatches = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    const std::size_t cap = 1 + rng.index(20);
    EvolutionHeap heap(cap);
    std::vector<std::pair<double, std::size_t>> all;
    const std::size_t n = rng.index(60);
    for (std::size_t i = 0; i < n; ++i) {
      HeapEntry e;
      e.pue = 1.0 + 0.02 * static_cast<double>(rng.index(15));
      e.design = std::to_string(i);
      all.push_back({e.pue, i});
      heap.append(std::move(e));
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t k = rng.index(cap + 3);
    const auto top = heap.topk(k);
    const std::size_t expect = std::min({k, cap, all.size()});
    bool same = top.size() == expect;
    for (std::size_t i = 0; same && i < expect; ++i) {
      same = top[i].pue == all[i].first && top[i].design == std::to_string(all[i].second);
    }
    mismatches += !same;
  }
  std::size_t non_monotone = 0;
  for (const auto& r : benchmark_rows) non_monotone += !r.best_trace_monotone;
  report(6, mismatches == 0 && non_monotone == 0 && !benchmark_rows.empty(),
         std::to_string(mismatches) + "/10000 heap mismatches, " + std::to_string(non_monotone) + "/" +
             std::to_string(benchmark_rows.size()) + " non-monotone best traces");
}

// ---------------------------------------------------------------------------

struct Verdict {
  bool geometry = true, power = true, cooling = true, rules = true, plant = true;

  bool valid() const { return geometry && power && cooling && rules && plant; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Independent evaluation of the spatial, power and cooling inequalities and
// the multiplicity rules.
Verdict brute_verdict(const Scene& s) {
  Verdict v;
  for (const auto& [name, room] : s.topology.rooms) {
    const RoomLayout& l = s.layout.rooms.at(name);
    for (double g : {l.margin, l.padding, l.aisle_gap, l.rack_gap, l.acu_gap}) v.geometry &= g >= 0.0;
    v.geometry &= l.aisle_gap >= 1.0;

    std::vector<const PlacedAsset*> in;
    RegionGeometry rg{{0, 0, 0}, {0, 0, 0}};
    for (const auto& p : s.placed) {
      if (p.room != name) continue;
      in.push_back(&p);
    }
    for (const auto& [slot, n] : room.racks) {
      if (n <= 0) continue;
      const Vec3 z = s.rack(slot).size;
      rg.rack = {std::max(rg.rack.x, z.x), std::max(rg.rack.y, z.y), std::max(rg.rack.z, z.z)};
    }
    for (const auto& [slot, n] : room.acus) {
      if (n <= 0) continue;
      const Vec3 z = s.acu(slot).size;
      rg.acu = {std::max(rg.acu.x, z.x), std::max(rg.acu.y, z.y), std::max(rg.acu.z, z.z)};
    }
    try {
      const FeasibleRegion f = feasible_region(l, s.room_dims.at(name), rg);
      for (const auto* p : in) {
        const Rect r = p->footprint();
        bool inside = false;
        if (p->category == AssetCategory::Acu) {
          inside = f.acu_strip.contains(r);
        } else {
          for (const Rect& row : f.rack_rows) inside |= row.contains(r);
        }
        v.geometry &= inside;
      }
    } catch (const Error&) {
      v.geometry = false;
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
      for (std::size_t j = i + 1; j < in.size(); ++j) {
        const Rect a = in[i]->footprint();
        const Rect b = in[j]->footprint();
        const double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
        const double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
        if (ox > 1e-9 && oy > 1e-9) v.geometry = false;
      }
    }

    int racks = 0;
    int acus = 0;
    double heat = 0.0;
    double capacity = 0.0;
    for (const auto& [slot, n] : room.racks) {
      racks += n;
      if (n > 0) v.power &= s.servers_per_rack * s.server.peak_power_kw <= s.rack(slot).power_capacity_kw + 1e-9;
      heat += n * s.servers_per_rack * s.server.peak_power_kw * s.server.heat_factor;
    }
    for (const auto& [slot, n] : room.acus) {
      acus += n;
      capacity += n * s.acu(slot).cooling_capacity_kw;
    }
    v.cooling &= capacity >= heat - 1e-9 * std::max(1.0, heat);
    v.rules &= racks % 4 == 0 && racks >= 16 && acus % 2 == 0 && acus >= 2;
  }
  int chillers = 0;
  int towers = 0;
  for (const auto& [_, n] : s.topology.chillers) chillers += n;
  for (const auto& [_, n] : s.topology.towers) towers += n;
  v.plant = chillers >= 1 && towers >= 1;
  return v;
}

void constraint_checker() {
  Rng rng(2718);
  int checked = 0;
  int agree = 0;
  std::map<std::string, int> failing;
  while (checked < 500) {
    const AssetLibrary lib = generate_synthetic_library(5, static_cast<std::uint64_t>(rng.integer(0, 1LL << 40)));
    SceneTopology t;
    SpatialLayout l;
    const int rooms = static_cast<int>(rng.integer(1, 2));
    for (int r = 0; r < rooms; ++r) {
      const std::string name = "hall_" + std::to_string(r + 1);
      t.rooms[name].racks[lib.racks()[rng.index(lib.racks().size())].id] = static_cast<int>(rng.integer(1, 40));
      if (rng.uniform(0, 1) < 0.3) {
        t.rooms[name].racks[lib.racks()[rng.index(lib.racks().size())].id] += static_cast<int>(rng.integer(1, 8));
      }
      t.rooms[name].acus[lib.acus()[rng.index(lib.acus().size())].id] = static_cast<int>(rng.integer(0, 8));
      if (rng.uniform(0, 1) < 0.5) {
        // rule-compliant counts, so valid scenes are well represented
        t.rooms[name].racks = {{lib.racks()[rng.index(lib.racks().size())].id, 4 * static_cast<int>(rng.integer(4, 8))}};
        t.rooms[name].acus = {{lib.acus()[rng.index(lib.acus().size())].id, 2 * static_cast<int>(rng.integer(1, 6))}};
      }
      auto gap = [&](double lo, double hi) { return rng.uniform(0, 1) < 0.05 ? -rng.uniform(0.01, 0.5) : rng.uniform(lo, hi); };
      l.rooms[name] = RoomLayout{gap(0.2, 2), gap(0, 1), gap(0.6, 2.5), gap(0, 0.4), gap(0, 1)};
    }
    if (rng.uniform(0, 1) < 0.9) t.chillers[lib.chillers()[rng.index(lib.chillers().size())].id] = static_cast<int>(rng.integer(1, 2));
    if (rng.uniform(0, 1) < 0.9) t.towers[lib.towers()[rng.index(lib.towers().size())].id] = 1;
    Scene s;
    try {
      s = synthesize_scene(t, l, lib);
    } catch (const Error&) {
      continue;
    }
    // perturb placements: overlaps, strays outside the region, shrunken rooms
    const double u = rng.uniform(0, 1);
    if (u < 0.1 && s.placed.size() > 1) {
      const std::size_t i = rng.index(s.placed.size());
      const std::size_t j = rng.index(s.placed.size());
      if (s.placed[i].room == s.placed[j].room) s.placed[i].location = s.placed[j].location;
    } else if (u < 0.2) {
      auto& p = s.placed[rng.index(s.placed.size())];
      p.location.x += rng.uniform(-3, 3);
      p.location.y += rng.uniform(-3, 3);
    } else if (u < 0.25) {
      auto& d = s.room_dims.begin()->second;
      d.width *= rng.uniform(0.3, 1.0);
      d.depth *= rng.uniform(0.3, 1.0);
    }
    const ConstraintReport rep = check_constraints(s, lib);
    const Verdict got{rep.geometry_ok, rep.power_ok, rep.cooling_ok, rep.layout_rules_ok, rep.plant_ok};
    const Verdict want = brute_verdict(s);
    ++checked;
    agree += got == want && rep.valid() == want.valid();
    if (!want.geometry) ++failing["geometry"];
    if (!want.power) ++failing["power"];
    if (!want.cooling) ++failing["cooling"];
    if (!want.rules) ++failing["rules"];
    if (!want.plant) ++failing["plant"];
    if (want.valid()) ++failing["valid"];
  }
  std::ostringstream mix;
  for (const auto& [k, n] : failing) mix << " " << k << "=" << n;
  report(7, agree == checked,
         std::to_string(agree) + "/" + std::to_string(checked) + " agree (scene mix:" + mix.str() + ")");
}

// ---------------------------------------------------------------------------

void reproducibility() {
  const fs::path root = fs::temp_directory_path() / "dcsynth_acceptance_repro";
  fs::remove_all(root);
  bool ok = true;
  std::string detail;
  for (const std::string gen : {"heuristic", "random", "ea"}) {
    std::string reports[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path out = root / (gen + std::to_string(i));
      const std::string cmd = std::string(CLI_PATH) + " design --scale small-edge --generator " + gen +
                              " --seed 11 -M 3 -N 3 -K 2 --hours 48 --out " + out.string() + " > " +
                              (root / "stdout.txt").string() + " 2>&1";
      fs::create_directories(root);
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        detail += gen + ": CLI failed; ";
        break;
      }
      reports[i] = slurp(out / "report.json") + slurp(out / "report.csv");
    }
    const bool same = !reports[0].empty() && reports[0] == reports[1];
    ok = ok && same;
    detail += gen + (same ? " identical; " : " differ; ");
  }
  fs::remove_all(root);
  report(8, ok, detail);
}

// ---------------------------------------------------------------------------

void case_study() {
  const AssetLibrary lib = generate_synthetic_library(10, 2024);
  const Requirements req = requirements_for_scale(Scale::SmallEdge);
  const auto weather = synthetic_weather(168);
  const auto ops = case_study_operations(168, 1, 0.8);
  RunConfig cfg = config_for_method("full");
  cfg.threads = 1;
  const RunReport run_report = run(cfg, {lib, req, weather, ops});
  if (!run_report.best) {
    report(9, false, "no valid design generated");
    return;
  }
  const auto t0 = Clock::now();
  const SimulationResult r = simulate(run_report.best->scene, weather, ops);
  std::ostringstream traj;
  write_trajectory_csv(r, traj);
  const double secs = seconds_since(t0);
  const double p = r.mean_pue.value_or(std::numeric_limits<double>::quiet_NaN());
  const std::string text = traj.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  std::size_t below = 0;
  for (const auto& s : r.steps) below += s.pue < 1.3;
  report(9, secs < 5.0 && p >= 1.0 && p < 2.0 && r.steps.size() == 168 && lines == 169,
         "168 steps in " + fmt(secs, 3) + " s, mean PUE " + fmt(p, 5) + ", " + std::to_string(below) +
             " hours below 1.3");
}

}  // namespace

int main() {
  try {
    gradient_fidelity();
    run_suite();
    energy_bookkeeping();
    psychrometrics();
    nearest_oracle();
    table_analogue();
    evolution_invariants();
    constraint_checker();
    reproducibility();
    case_study();
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
