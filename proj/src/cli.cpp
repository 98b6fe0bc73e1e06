#include "dcsynth/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dcsynth/error.hpp"
#include "dcsynth/evolution.hpp"
#include "json.hpp"

namespace dcsynth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kDefaultLibrarySize = 10;
constexpr std::uint64_t kDefaultLibrarySeed = 2024;
constexpr double kDefaultFanRatio = 0.8;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <class F>
void write_stream(const fs::path& path, F&& fn) {
  std::ostringstream os;
  fn(os);
  write_text(path, os.str());
}

// Inputs shared by several subcommands.
struct Inputs {
  std::string library;
  std::size_t library_size = kDefaultLibrarySize;
  std::uint64_t library_seed = kDefaultLibrarySeed;
  std::string weather;
  std::string ops;
  std::size_t hours = 168;
  std::uint64_t ops_seed = 1;
  double fan_ratio = kDefaultFanRatio;

  void add_library(CLI::App& app) {
    app.add_option("--library", library, "asset library JSON (default: synthetic)");
    app.add_option("--library-size", library_size, "synthetic assets per category")->check(CLI::PositiveNumber);
    app.add_option("--library-seed", library_seed, "synthetic library seed");
  }
  void add_series(CLI::App& app) {
    app.add_option("--weather", weather, "weather CSV (default: synthetic diurnal)");
    app.add_option("--ops", ops, "operations CSV (default: seeded case-study series)");
    app.add_option("--hours", hours, "horizon of generated series")->check(CLI::PositiveNumber);
    app.add_option("--ops-seed", ops_seed, "seed of the generated operations series");
    app.add_option("--fan-ratio", fan_ratio, "fan flow ratio of the generated operations series");
  }

  AssetLibrary load_lib() const {
    return library.empty() ? generate_synthetic_library(library_size, library_seed) : load_library(library);
  }
  std::vector<WeatherRecord> load_weather() const {
    return weather.empty() ? synthetic_weather(hours) : load_weather_csv(weather);
  }
  std::vector<OperatingPoint> load_ops() const {
    return ops.empty() ? case_study_operations(hours, ops_seed, fan_ratio) : load_operations_csv(ops);
  }
};

Normalization normalization_from(bool raw) { return raw ? Normalization::Raw : Normalization::ZScore; }

// Config-file keys become flags, unless the flag already appears on the
// command line.
std::vector<std::string> config_args(const json& cfg, const std::vector<std::string>& given) {
  std::vector<std::string> out;
  if (!cfg.is_object()) throw Error(ErrorKind::Config, "config file must hold a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "llm") continue;
    const std::string flag = "--" + key;
    static const std::map<std::string, std::string> kShort{{"iterations", "-M"}, {"samples", "-N"}, {"topk", "-K"}};
    const auto alias = kShort.find(key);
    const bool present = std::any_of(given.begin(), given.end(), [&](const std::string& a) {
      if (alias != kShort.end() && a.rfind(alias->second, 0) == 0) return true;
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (present) continue;
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      if (value.empty()) continue;
      out.push_back(flag);
      for (const auto& v : value) out.push_back(scalar(v));
    } else if (!value.is_null()) {
      out.push_back(flag);
      out.push_back(scalar(value));
    }
  }
  return out;
}

json simulation_summary(const SimulationResult& r) {
  std::map<std::string, std::size_t> counts;
  for (const auto& f : r.failures) ++counts[std::string(to_string(f.kind))];
  return {{"steps", r.steps.size()},
          {"rooms", r.rooms},
          {"mean_pue", r.mean_pue ? json(*r.mean_pue) : json(nullptr)},
          {"degenerate", r.degenerate},
          {"failure_counts", counts},
          {"failure_events", r.failures.size()},
          {"max_energy_imbalance", max_energy_imbalance(r)}};
}

json violations_json(const ConstraintReport& rep) {
  json v = json::array();
  for (const auto& x : rep.violations) {
    v.push_back({{"constraint", x.constraint}, {"message", x.message}, {"magnitude", x.magnitude}});
  }
  return v;
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Physics-guided data center scene synthesis"};
  app.require_subcommand(1, 1);
  app.fallthrough();  // --config may follow the subcommand
  app.set_version_flag("--version", "dcsynth 0.1.0");
  std::string config_file;
  app.add_option("--config", config_file, "JSON file supplying any flag; command-line flags win");

  // design
  auto* design = app.add_subcommand("design", "run the evolutionary synthesis loop");
  Inputs d_in;
  std::string d_req, d_scale = "small-edge", d_out, d_gen = "heuristic", d_llm;
  RunConfig d_cfg;
  bool no_design = false, no_reflect = false, no_phy = false, direct = false, raw_distance = false;
  design->add_option("--requirements", d_req, "requirements JSON");
  design->add_option("--scale", d_scale, "requirements preset when no file is given")
      ->check(CLI::IsMember({"small-edge", "medium-cluster", "large-cloud"}));
  d_in.add_library(*design);
  d_in.add_series(*design);
  design->add_option("--generator", d_gen)->check(CLI::IsMember({"llm", "heuristic", "random", "ea"}));
  design->add_option("--iterations,-M", d_cfg.iterations)->check(CLI::PositiveNumber);
  design->add_option("--samples,-N", d_cfg.samples)->check(CLI::PositiveNumber);
  design->add_option("--topk,-K", d_cfg.topk)->check(CLI::NonNegativeNumber);
  design->add_option("--seed", d_cfg.seed);
  design->add_option("--threads", d_cfg.threads);
  design->add_option("--optimizer-horizon", d_cfg.optimizer_horizon)->check(CLI::PositiveNumber);
  design->add_option("--optimizer-steps", d_cfg.optimizer.max_steps)->check(CLI::PositiveNumber);
  design->add_option("--learning-rate", d_cfg.optimizer.learning_rate);
  design->add_flag("--no-design-llm", no_design, "seed iterations with random samples");
  design->add_flag("--no-reflect", no_reflect, "no reflection; feedback by mutation");
  design->add_flag("--no-phy", no_phy, "skip physics optimization");
  design->add_flag("--direct", direct, "no feedback between iterations");
  design->add_flag("--raw-distance", raw_distance, "nearest-asset search in raw units");
  design->add_option("--llm-config", d_llm, "LLM endpoint JSON (base_url, model, token_env, ...)");
  design->add_option("--out", d_out, "output directory")->required();

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate a scene over a weather/operations series");
  Inputs s_in;
  std::string s_scene, s_out;
  s_in.add_library(*simulate_cmd);
  s_in.add_series(*simulate_cmd);
  simulate_cmd->add_option("--scene", s_scene, "scene JSON")->required();
  simulate_cmd->add_option("--out", s_out, "output directory")->required();

  // optimize
  auto* optimize_cmd = app.add_subcommand("optimize", "optimize asset parameters and refine a scene");
  Inputs o_in;
  std::string o_scene, o_out;
  OptimizationConfig o_cfg;
  bool o_raw = false;
  o_in.hours = 24;
  o_in.add_library(*optimize_cmd);
  o_in.add_series(*optimize_cmd);
  optimize_cmd->add_option("--scene", o_scene, "scene JSON")->required();
  optimize_cmd->add_option("--steps", o_cfg.max_steps)->check(CLI::PositiveNumber);
  optimize_cmd->add_option("--learning-rate", o_cfg.learning_rate);
  optimize_cmd->add_option("--penalty-weight", o_cfg.penalty_weight);
  optimize_cmd->add_flag("--raw-distance", o_raw);
  optimize_cmd->add_option("--out", o_out, "output directory")->required();

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "methods x scales x library sizes x seeds");
  BenchmarkConfig b_cfg;
  std::vector<std::string> b_scales = {"small-edge", "medium-cluster", "large-cloud"};
  std::size_t b_seeds = 5;
  std::uint64_t b_first_seed = 1;
  std::string b_out;
  bench->add_option("--methods", b_cfg.methods)->check(CLI::IsMember(known_methods()));
  bench->add_option("--scales", b_scales)->check(CLI::IsMember({"small-edge", "medium-cluster", "large-cloud"}));
  bench->add_option("--library-sizes", b_cfg.library_sizes)->check(CLI::PositiveNumber);
  bench->add_option("--seeds", b_seeds, "number of seeds")->check(CLI::PositiveNumber);
  bench->add_option("--first-seed", b_first_seed);
  bench->add_option("--iterations,-M", b_cfg.iterations)->check(CLI::PositiveNumber);
  bench->add_option("--samples,-N", b_cfg.samples)->check(CLI::PositiveNumber);
  bench->add_option("--topk,-K", b_cfg.topk)->check(CLI::NonNegativeNumber);
  bench->add_option("--hours", b_cfg.horizon)->check(CLI::PositiveNumber);
  bench->add_option("--large-hours", b_cfg.large_horizon)->check(CLI::PositiveNumber);
  bench->add_option("--library-seed", b_cfg.library_seed);
  bench->add_option("--threads", b_cfg.base.threads);
  bench->add_option("--out", b_out, "CSV path (default: stdout)");

  // weather
  auto* weather_cmd = app.add_subcommand("weather", "psychrometrics of a weather CSV");
  std::string w_csv;
  bool w_summary = false;
  weather_cmd->add_option("--csv", w_csv, "weather CSV (hour,dry_bulb_c,rh_pct[,pressure_pa])")->required();
  weather_cmd->add_flag("--summary", w_summary, "print only the period means");

  // gen-library
  auto* genlib = app.add_subcommand("gen-library", "write a synthetic asset library");
  std::size_t g_size = kDefaultLibrarySize;
  std::uint64_t g_seed = kDefaultLibrarySeed;
  std::string g_out;
  genlib->add_option("--size", g_size, "assets per category")->check(CLI::PositiveNumber);
  genlib->add_option("--seed", g_seed);
  genlib->add_option("--out", g_out, "library JSON path")->required();

  auto fail = [&](std::string_view kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
  };

  std::vector<std::string> args = args_in;
  json config_doc;
  try {
    // The config file is read before the real parse so its keys can become flags.
    for (std::size_t i = 1; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (path.empty()) continue;
      config_doc = read_json(path);
      const auto extra = config_args(config_doc, args);
      // after the subcommand name, so they bind to it
      std::size_t pos = args.size();
      for (std::size_t j = 1; j < args.size(); ++j) {
        if (app.get_subcommand_no_throw(args[j]) != nullptr) {
          pos = j + 1;
          break;
        }
      }
      args.insert(args.begin() + static_cast<long>(pos), extra.begin(), extra.end());
      break;
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << "dcsynth 0.1.0\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      if (sub->get_help_ptr() && sub->get_help_ptr()->count() > 0) {
        out << sub->help();
        return kOk;
      }
    }
    return fail("usage", msg, kUsageError);
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what(), kUsageError);
  }

  try {
    if (design->parsed()) {
      const Requirements req = d_req.empty() ? requirements_for_scale(*scale_from_string(d_scale))
                                             : load_requirements(d_req);
      const AssetLibrary library = d_in.load_lib();
      const auto weather = d_in.load_weather();
      const auto ops = d_in.load_ops();
      RunConfig cfg = d_cfg;
      cfg.generator = *generator_from_string(d_gen);
      cfg.design = !no_design;
      cfg.reflection = !no_reflect;
      cfg.physics = !no_phy;
      cfg.direct = direct;
      cfg.normalization = normalization_from(raw_distance);
      if (!d_llm.empty()) {
        cfg.llm = llm_config_from_json(read_json(d_llm));
      } else if (config_doc.is_object() && config_doc.contains("llm")) {
        cfg.llm = llm_config_from_json(config_doc.at("llm"));
      }
      if (cfg.generator == GeneratorKind::Llm) {
        if (!cfg.llm) {
          LlmEndpointConfig env_cfg;
          if (const char* url = std::getenv("DCSYNTH_LLM_BASE_URL")) env_cfg.base_url = url;
          if (const char* model = std::getenv("DCSYNTH_LLM_MODEL")) env_cfg.model = model;
          cfg.llm = env_cfg;
        }
        // token first: it is the usual missing piece
        const char* token = std::getenv(cfg.llm->token_env.c_str());
        if (token == nullptr || *token == '\0') {
          throw Error(ErrorKind::Auth, "--generator llm needs a bearer token in $" + cfg.llm->token_env);
        }
        ChatClient probe(*cfg.llm);
      }
      const RunReport report = run(cfg, RunInputs{library, req, weather, ops});
      const fs::path dir(d_out);
      write_json(dir / "report.json", report_to_json(report));
      write_stream(dir / "report.csv", [&](std::ostream& os) { write_report_csv(report, os); });
      if (report.best) {
        write_json(dir / "best_scene.json", scene_to_json(report.best->scene));
      } else {
        fs::remove(dir / "best_scene.json");
      }
      out << json{{"method", report.method},
                  {"best_pue", report.best_pue ? json(*report.best_pue) : json(nullptr)},
                  {"mean_gsr", report.mean_gsr()},
                  {"out", dir.string()}}
                 .dump()
          << '\n';
      return kOk;
    }

    if (simulate_cmd->parsed()) {
      const AssetLibrary library = s_in.load_lib();
      const Scene scene = scene_from_json(read_json(s_scene), library);
      const ConstraintReport rep = check_constraints(scene, library);
      if (!rep.syntax_valid) {
        err << json{{"error", "invalid_scene"}, {"violations", violations_json(rep)}}.dump() << '\n';
        return kRuntimeError;
      }
      const SimulationResult result = simulate(scene, s_in.load_weather(), s_in.load_ops());
      const fs::path dir(s_out);
      write_stream(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(result, os); });
      json summary = simulation_summary(result);
      summary["constraints_valid"] = rep.valid();
      summary["violations"] = violations_json(rep);
      write_json(dir / "summary.json", summary);
      out << summary.dump() << '\n';
      return kOk;
    }

    if (optimize_cmd->parsed()) {
      const AssetLibrary library = o_in.load_lib();
      const Scene scene = scene_from_json(read_json(o_scene), library);
      const auto inputs = make_inputs(o_in.load_weather(), o_in.load_ops());
      const IdealAssetSet ideal = optimize_parameters(scene, inputs, library, o_cfg);
      const Scene refined = refine_scene(scene, ideal, library, normalization_from(o_raw));
      const fs::path dir(o_out);
      write_stream(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(ideal, os); });
      write_json(dir / "refined_scene.json", scene_to_json(refined));
      json summary = {{"initial_objective", ideal.initial_objective},
                      {"objective", ideal.objective},
                      {"mean_pue", ideal.mean_pue},
                      {"penalty", ideal.penalty},
                      {"steps", ideal.steps},
                      {"alpha", ideal.alpha},
                      {"bindings", refined.bindings()}};
      write_json(dir / "summary.json", summary);
      out << json{{"objective", ideal.objective}, {"mean_pue", ideal.mean_pue}, {"bindings", refined.bindings()}}
                 .dump()
          << '\n';
      return kOk;
    }

    if (bench->parsed()) {
      b_cfg.scales.clear();
      for (const auto& s : b_scales) b_cfg.scales.push_back(*scale_from_string(s));
      b_cfg.seeds.clear();
      for (std::size_t i = 0; i < b_seeds; ++i) b_cfg.seeds.push_back(b_first_seed + i);
      const auto rows = run_benchmark(b_cfg, [&](const BenchmarkRow& r) {
        err << "# " << r.method << ' ' << to_string(r.scale) << " L=" << r.library_size << " seed=" << r.seed
            << " pue=" << (r.best_pue ? std::to_string(*r.best_pue) : "none") << " gsr=" << r.mean_gsr << '\n';
      });
      if (b_out.empty()) {
        write_benchmark_csv(rows, out);
      } else {
        write_stream(b_out, [&](std::ostream& os) { write_benchmark_csv(rows, os); });
      }
      return kOk;
    }

    if (weather_cmd->parsed()) {
      const auto records = load_weather_csv(w_csv);
      if (records.empty()) throw Error(ErrorKind::Parse, w_csv + ": no weather rows");
      const WeatherSummary s = summarize(records);
      if (!w_summary) {
        out << "hour,dry_bulb_c,rh_pct,wet_bulb_c,humidity_ratio,outside_stull_range\n";
        out.precision(8);
        for (const auto& r : records) {
          const auto e = external_conditions(r);
          out << r.hour << ',' << r.dry_bulb_c << ',' << r.rh_pct << ',' << e.wet_bulb_c << ',' << e.humidity_ratio
              << ',' << (e.outside_stull_range ? 1 : 0) << '\n';
        }
      }
      out << json{{"hours", s.hours},
                  {"mean_dry_bulb_c", s.mean_dry_bulb_c},
                  {"mean_wet_bulb_c", s.mean_wet_bulb_c},
                  {"mean_humidity_ratio", s.mean_humidity_ratio},
                  {"flagged_hours", s.flagged_hours}}
                 .dump()
          << '\n';
      return kOk;
    }

    if (genlib->parsed()) {
      save_library(generate_synthetic_library(g_size, g_seed), g_out);
      out << json{{"out", g_out}, {"assets_per_category", g_size}, {"seed", g_seed}}.dump() << '\n';
      return kOk;
    }
  } catch (const Error& e) {
    const bool config = e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Auth;
    return fail(to_string(e.kind()), e.what(), config ? kUsageError : kRuntimeError);
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what(), kRuntimeError);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kRuntimeError);
  }
  return fail("usage", "no subcommand", kUsageError);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace dcsynth::cli
