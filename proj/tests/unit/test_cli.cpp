#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcsynth/cli.hpp"
#include "dcsynth/physics.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace dcsynth;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation call(std::vector<std::string> args) {
  args.insert(args.begin(), "dcsynth");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dcsynth_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// writes scene_a, a weather CSV and an ops CSV of `hours` rows
void write_case(const fs::path& dir, std::size_t hours, std::size_t ops_hours, OperatingPoint op = {}) {
  std::ofstream(dir / "scene.json") << scene_to_json(testing::scene_a()).dump(2);
  std::ofstream w(dir / "weather.csv");
  write_weather_csv(synthetic_weather(hours), w);
  std::ofstream o(dir / "ops.csv");
  write_operations_csv(constant_operations(ops_hours, op), o);
}

}  // namespace

TEST_CASE("llm generator without a token: auth error, nonzero exit") {
  ::unsetenv("DCSYNTH_LLM_TOKEN");
  const auto dir = scratch("auth");
  const auto r = call({"design", "--generator", "llm", "--out", dir.string()});
  CHECK(r.code != 0);
  const json e = json::parse(r.err);
  CHECK(e["error"] == "auth");
  CHECK(e["message"].get<std::string>().find("DCSYNTH_LLM_TOKEN") != std::string::npos);
}

TEST_CASE("design with --no-phy is labelled and deterministic") {
  const auto dir = scratch("design");
  const std::vector<std::string> args{"design", "--scale", "small-edge", "-M", "2", "-N", "2", "-K", "2",
                                      "--hours", "24", "--no-phy", "--out", dir.string()};
  const auto r = call(args);
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["method"] == "ABL(w/o phy)");
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["method"] == "ABL(w/o phy)");
  CHECK(fs::exists(dir / "report.csv"));
  const std::string first = slurp(dir / "report.json");
  REQUIRE(call(args).code == 0);
  CHECK(slurp(dir / "report.json") == first);
}

TEST_CASE("config file supplies flags, command line wins") {
  const auto dir = scratch("config");
  std::ofstream(dir / "cfg.json") << json{{"iterations", 1}, {"samples", 2}, {"hours", 24}, {"seed", 9}}.dump();
  const auto r = call({"design", "--config", (dir / "cfg.json").string(), "-N", "3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["candidates"].size() == 3);
}

TEST_CASE("simulate writes trajectory and summary") {
  const auto dir = scratch("simulate");
  write_case(dir, 168, 168);
  const auto r = call({"simulate", "--scene", (dir / "scene.json").string(), "--library",
                       testing::fixture("acu_a_library.json"), "--weather", (dir / "weather.csv").string(), "--ops",
                       (dir / "ops.csv").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  const json s = json::parse(slurp(dir / "summary.json"));
  CHECK(s["mean_pue"].get<double>() >= 1.0);
  CHECK(s["constraints_valid"] == true);
  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 169);
}

TEST_CASE("simulate at zero utilization: idle IT load, finite PUE") {
  const auto dir = scratch("idle");
  write_case(dir, 24, 24, {0.0, 18.0, 0.6});
  const auto r = call({"simulate", "--scene", (dir / "scene.json").string(), "--library",
                       testing::fixture("acu_a_library.json"), "--weather", (dir / "weather.csv").string(), "--ops",
                       (dir / "ops.csv").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  const double p = json::parse(r.out)["mean_pue"];
  CHECK(std::isfinite(p));
  CHECK(p >= 1.0);
  const std::string traj = slurp(dir / "trajectory.csv");
  // 128 servers at 0.1 kW idle
  CHECK(traj.find(",12.8,") != std::string::npos);
}

TEST_CASE("simulate: mismatched series lengths") {
  const auto dir = scratch("mismatch");
  write_case(dir, 24, 23);
  const auto r = call({"simulate", "--scene", (dir / "scene.json").string(), "--library",
                       testing::fixture("acu_a_library.json"), "--weather", (dir / "weather.csv").string(), "--ops",
                       (dir / "ops.csv").string(), "--out", dir.string()});
  CHECK(r.code != 0);
  CHECK(json::parse(r.err)["error"] == "series_mismatch");
}

TEST_CASE("weather: constant 20 C / 50 % gives 13.70 C") {
  const auto dir = scratch("weather");
  std::ofstream w(dir / "w.csv");
  write_weather_csv(testing::constant_weather(24, 20.0, 50.0), w);
  w.close();
  const auto r = call({"weather", "--csv", (dir / "w.csv").string(), "--summary"});
  REQUIRE(r.code == 0);
  const double wb = json::parse(r.out)["mean_wet_bulb_c"];
  CHECK(std::abs(wb - 13.70) < 0.005);
}

TEST_CASE("weather: empty file and bad rows") {
  const auto dir = scratch("weather_bad");
  std::ofstream(dir / "empty.csv").close();
  const auto r = call({"weather", "--csv", (dir / "empty.csv").string()});
  CHECK(r.code != 0);
  CHECK(json::parse(r.err)["error"] == "parse");
  std::ofstream(dir / "bad.csv") << "hour,dry_bulb_c,rh_pct,pressure_pa\n0,20,50,101325\n1,20,150,101325\n";
  const auto b = call({"weather", "--csv", (dir / "bad.csv").string()});
  CHECK(b.code != 0);
  CHECK(json::parse(b.err)["message"].get<std::string>().find("line 3") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(call({}).code == cli::kUsageError);
  CHECK(call({"design"}).code == cli::kUsageError);
  CHECK(call({"benchmark", "--methods", "nope"}).code == cli::kUsageError);
}

TEST_CASE("gen-library and the installed binary") {
  const auto dir = scratch("binary");
  const std::string lib = (dir / "lib.json").string();
  const std::string cmd = std::string(CLI_PATH) + " gen-library --size 7 --seed 3 --out " + lib + " > " +
                          (dir / "stdout.txt").string();
  CHECK(std::system(cmd.c_str()) == 0);
  const json doc = json::parse(slurp(lib));
  CHECK(doc["acus"].size() == 7);
}
