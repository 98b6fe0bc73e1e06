#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dcsynth/assets.hpp"
#include "dcsynth/physics.hpp"
#include "dcsynth/scene.hpp"
#include "dcsynth/weather.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

inline dcsynth::AcuSpec acu_a() {
  dcsynth::AcuSpec a;
  a.id = "ACU_A";
  a.cooling_capacity_kw = 146.8;
  a.cooling_type = "DX";
  a.pressure_rise_pa = 460.4;
  a.design_water_flow_m3s = 0.003097;
  a.design_air_flow_m3s = 13.099;
  a.maximum_flow_m3s = 12.381;
  a.design_inlet_water_c = 16.6;
  a.design_outlet_water_c = 23.6;
  a.design_inlet_air_c = 34.7;
  a.design_outlet_air_c = 25.1;
  a.design_water_delta_k = 7.9;
  return a;
}

inline dcsynth::RackSpec rack_a() { return {"RACK_A", 8.0, 16, {0.6, 1.2, 2.0}}; }
inline dcsynth::ServerSpec server_a() { return {"SRV_A", 0.1, 0.3, 1e12, 1.0}; }
inline dcsynth::ChillerSpec chiller_a() { return {"CH_A", 500.0, 0.5, 7.0, 0.02, {3.0, 1.5, 2.0}}; }
inline dcsynth::TowerSpec tower_a() { return {"CT_A", 600.0, 6.0, 5.0, {4.0, 4.0, 4.0}}; }

inline dcsynth::AssetLibrary library_a() {
  return dcsynth::AssetLibrary({acu_a(), rack_a(), server_a(), chiller_a(), tower_a()});
}

// One hall: `racks` RACK_A and `acus` ACU_A, one chiller, one tower.
inline dcsynth::SceneTopology topology_a(int racks = 16, int acus = 2) {
  dcsynth::SceneTopology t;
  t.rooms["hall_1"].racks["RACK_A"] = racks;
  t.rooms["hall_1"].acus["ACU_A"] = acus;
  t.chillers["CH_A"] = 1;
  t.towers["CT_A"] = 1;
  return t;
}

inline dcsynth::SpatialLayout layout_a() {
  dcsynth::SpatialLayout l;
  l.rooms["hall_1"] = dcsynth::RoomLayout{1.0, 0.5, 1.2, 0.0, 0.5};
  return l;
}

inline dcsynth::Scene scene_a(int racks = 16, int acus = 2) {
  return dcsynth::synthesize_scene(topology_a(racks, acus), layout_a(), library_a(), 8);
}

inline std::vector<dcsynth::WeatherRecord> constant_weather(std::size_t hours, double t = 25.0, double rh = 60.0) {
  std::vector<dcsynth::WeatherRecord> w;
  for (std::size_t h = 0; h < hours; ++h) w.push_back({static_cast<int>(h), t, rh, 101325.0});
  return w;
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testing
