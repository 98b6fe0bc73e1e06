#include <filesystem>
#include <fstream>

#include "dcsynth/assets.hpp"
#include "dcsynth/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dcsynth;
using nlohmann::json;

TEST_CASE("appendix ACU listing loads field for field") {
  const AssetLibrary lib = load_library(testing::fixture("acu_a_library.json"));
  const AcuSpec* a = lib.find_acu("ACU_A");
  REQUIRE(a != nullptr);
  CHECK(a->cooling_capacity_kw == 146.8);
  CHECK(a->pressure_rise_pa == 460.4);
  CHECK(a->design_air_flow_m3s == 13.099);
  CHECK(a->design_water_flow_m3s == 0.003097);
  CHECK(a->cooling_type == "DX");
  CHECK(a->design_water_delta_k == 7.9);
  CHECK(lib.usable());
}

TEST_CASE("ACU parameter vector order") {
  const auto v = parameter_vector(testing::acu_a());
  const std::vector<double> expected{146.8, 460.4, 13.099, 0.003097, 16.6, 25.1};
  CHECK(v == expected);
  AcuSpec other = testing::acu_a();
  other.id = "ACU_B";
  CHECK(parameter_vector(other) == v);
  other.cooling_capacity_kw = 50;
  CHECK(parameter_vector(other).size() == 6);
  CHECK(parameter_vector(other) != v);
}

TEST_CASE("parameter fields per category") {
  CHECK(parameter_fields(AssetCategory::Acu).size() == 6);
  CHECK(parameter_fields(AssetCategory::Rack).size() == 2);
  CHECK(parameter_fields(AssetCategory::Server).size() == 4);
  CHECK(parameter_fields(AssetCategory::Chiller).size() == 4);
  CHECK(parameter_fields(AssetCategory::CoolingTower).size() == 3);
  CHECK(parameter_fields(AssetCategory::Acu)[0] == "coolingCapacity");
}

TEST_CASE("with_parameters inverts parameter_vector") {
  const AssetSpec a = testing::acu_a();
  auto v = parameter_vector(a);
  v[1] = 500.0;
  const AssetSpec b = with_parameters(a, v);
  CHECK(parameter_vector(b) == v);
  CHECK(id_of(b) == "ACU_A");
}

TEST_CASE("empty library is unusable") {
  const AssetLibrary lib = library_from_json(json::object());
  CHECK(lib.size() == 0);
  CHECK_FALSE(lib.usable());
}

TEST_CASE("negative cooling capacity is rejected by name") {
  json doc = json::parse(std::ifstream(testing::fixture("acu_a_library.json")));
  doc["acus"]["ACU_A"]["coolingCapacity"] = -5;
  try {
    library_from_json(doc);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("coolingCapacity must be > 0") != std::string::npos);
    CHECK(std::string(e.what()).find("ACU_A") != std::string::npos);
  }
}

TEST_CASE("malformed library JSON is a parse error") {
  const auto path = std::filesystem::temp_directory_path() / "dcsynth_bad_lib.json";
  std::ofstream(path) << "{\"acus\": {";
  CHECK_THROWS_AS(load_library(path), Error);
  try {
    load_library(path);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }
}

TEST_CASE("duplicate ids rejected") {
  CHECK_THROWS_AS(AssetLibrary({testing::acu_a(), testing::acu_a()}), Error);
}

TEST_CASE("synthetic library: counts, determinism, invariants") {
  const AssetLibrary a = generate_synthetic_library(10, 1);
  for (auto c : kAllCategories) CHECK(a.count(c) == 10);
  const AssetLibrary b = generate_synthetic_library(10, 1);
  CHECK(library_to_json(a).dump() == library_to_json(b).dump());
  CHECK(library_to_json(a).dump() != library_to_json(generate_synthetic_library(10, 2)).dump());

  const AssetLibrary big = generate_synthetic_library(50, 7);
  for (auto c : kAllCategories) {
    CHECK(big.count(c) == 50);
    for (const auto& asset : big.assets(c)) CHECK_NOTHROW(validate(asset));
  }
  for (const auto& acu : big.acus()) {
    CHECK(acu.cooling_capacity_kw >= 50.0);
    CHECK(acu.cooling_capacity_kw <= 500.0);
  }
}

TEST_CASE("save then load is the identity") {
  const AssetLibrary lib = generate_synthetic_library(12, 3);
  const auto path = std::filesystem::temp_directory_path() / "dcsynth_roundtrip_lib.json";
  save_library(lib, path);
  const AssetLibrary back = load_library(path);
  CHECK(back == lib);
}
