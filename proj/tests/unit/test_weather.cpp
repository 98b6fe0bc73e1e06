#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcsynth/error.hpp"
#include "dcsynth/weather.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace dcsynth;

TEST_CASE("independent psychrometric oracle") {
  const auto doc = nlohmann::json::parse(std::ifstream(testing::fixture("psychrometrics.json")));
  for (const auto& c : doc["cases"]) {
    const double t = c["dry_bulb_c"];
    const double rh = c["rh_pct"];
    const double p = c["pressure_pa"];
    CAPTURE(t);
    CAPTURE(rh);
    CHECK(testing::rel_err(saturation_vapor_pressure(t), c["p_ws_pa"].get<double>()) < 1e-9);
    CHECK(testing::rel_err(humidity_ratio(t, rh, p), c["humidity_ratio"].get<double>()) < 1e-9);
    CHECK(std::abs(wet_bulb_stull(t, rh) - c["wet_bulb_c"].get<double>()) < 1e-9);
  }
}

TEST_CASE("Stull at 20 C, 50 %") {
  CHECK(std::abs(wet_bulb_stull(20.0, 50.0) - 13.70) < 0.005);
}

TEST_CASE("wet bulb never exceeds dry bulb on the grid") {
  for (double t = -20.0; t <= 50.0; t += 0.5) {
    for (double rh = 0.0; rh <= 100.0; rh += 1.0) {
      CHECK(wet_bulb_stull(t, rh) <= t);
    }
  }
  // the raw fit overshoots near saturation; the clamp fixes it
  CHECK(stull_formula(30.0, 100.0) > 30.0);
  CHECK(wet_bulb_stull(30.0, 100.0) == 30.0);
}

TEST_CASE("Buck saturation pressure") {
  CHECK(saturation_vapor_pressure(0.0) == doctest::Approx(611.21).epsilon(1e-12));
  double prev = saturation_vapor_pressure(-40.0);
  for (double t = -39.0; t <= 60.0; t += 1.0) {
    const double p = saturation_vapor_pressure(t);
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("humidity ratio in RH") {
  CHECK(humidity_ratio(25.0, 0.0, 101325.0) == 0.0);
  double prev = 0.0;
  for (double rh = 5.0; rh <= 100.0; rh += 5.0) {
    const double w = humidity_ratio(25.0, rh, 101325.0);
    CHECK(w > prev);
    prev = w;
  }
  CHECK_THROWS_AS(humidity_ratio(90.0, 100.0, 20000.0), Error);
}

TEST_CASE("Stull range flag") {
  CHECK(in_stull_range(5.0));
  CHECK(in_stull_range(99.0));
  CHECK_FALSE(in_stull_range(2.0));
  CHECK(external_conditions({0, 25.0, 2.0, 101325.0}).outside_stull_range);
  CHECK_FALSE(external_conditions({0, 25.0, 50.0, 101325.0}).outside_stull_range);
}

TEST_CASE("RH out of range rejected with its line") {
  std::istringstream in("hour,dry_bulb_c,rh_pct,pressure_pa\n0,20,50,101325\n1,20,120,101325\n");
  try {
    parse_weather_csv(in);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("CSV errors") {
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_weather_csv(empty), Error);
  std::istringstream missing("hour,dry_bulb_c,pressure_pa\n0,20,101325\n");
  try {
    parse_weather_csv(missing);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("rh_pct") != std::string::npos);
  }
  std::istringstream header_only("hour,dry_bulb_c,rh_pct,pressure_pa\n");
  CHECK(parse_weather_csv(header_only).empty());
  const auto path = std::filesystem::temp_directory_path() / "dcsynth_header_only.csv";
  std::ofstream(path) << "hour,dry_bulb_c,rh_pct,pressure_pa\n";
  CHECK(load_weather_csv(path).empty());
  CHECK_THROWS_AS(summarize(load_weather_csv(path)), Error);
}

TEST_CASE("column order is free and extra columns ignored") {
  std::istringstream in("rh_pct,note,pressure_pa,hour,dry_bulb_c\n50,x,101325,0,20\n");
  const auto w = parse_weather_csv(in);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == WeatherRecord{0, 20.0, 50.0, 101325.0});
}

TEST_CASE("CSV round trip") {
  const auto w = synthetic_weather(48);
  std::stringstream s;
  write_weather_csv(w, s);
  CHECK(parse_weather_csv(s) == w);
}

TEST_CASE("synthetic diurnal series peaks at 15:00") {
  const auto w = synthetic_weather(24);
  std::size_t hottest = 0;
  for (std::size_t h = 1; h < w.size(); ++h) {
    if (w[h].dry_bulb_c > w[hottest].dry_bulb_c) hottest = h;
  }
  CHECK(hottest == 15);
  CHECK(w[15].dry_bulb_c == doctest::Approx(32.0));
  CHECK(w[15].rh_pct == doctest::Approx(58.0));
}

TEST_CASE("summary means") {
  const auto w = testing::constant_weather(10, 20.0, 50.0);
  const WeatherSummary s = summarize(w);
  CHECK(s.hours == 10);
  CHECK(s.mean_dry_bulb_c == doctest::Approx(20.0));
  CHECK(s.mean_wet_bulb_c == doctest::Approx(wet_bulb_stull(20.0, 50.0)));
  CHECK(s.flagged_hours == 0);
}
