#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace dcsynth {

enum class AssetCategory { Acu, Rack, Server, Chiller, CoolingTower };

inline constexpr AssetCategory kAllCategories[] = {
    AssetCategory::Acu, AssetCategory::Rack, AssetCategory::Server, AssetCategory::Chiller,
    AssetCategory::CoolingTower};

std::string_view to_string(AssetCategory c);
// Top-level section name in the library file ("acus", "racks", ...).
std::string_view section_name(AssetCategory c);
std::optional<AssetCategory> category_from_section(std::string_view section);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Air-cooling unit. Field names in the library file follow the SimReady
// ACU listing (coolingCapacity, pressureRise, ...).
struct AcuSpec {
  std::string id;
  double cooling_capacity_kw = 0.0;
  std::string cooling_type;
  double pressure_rise_pa = 0.0;
  double design_water_flow_m3s = 0.0;
  double design_air_flow_m3s = 0.0;
  double maximum_flow_m3s = 0.0;
  double design_inlet_water_c = 0.0;
  double design_outlet_water_c = 0.0;
  double design_inlet_air_c = 0.0;
  double design_outlet_air_c = 0.0;
  double design_water_delta_k = 0.0;
  Vec3 size{0.995, 2.23, 2.0};

  friend bool operator==(const AcuSpec&, const AcuSpec&) = default;
};

struct RackSpec {
  std::string id;
  double power_capacity_kw = 0.0;
  int server_slots = 0;
  Vec3 size{0.6, 1.2, 2.0};

  friend bool operator==(const RackSpec&, const RackSpec&) = default;
};

struct ServerSpec {
  std::string id;
  double idle_power_kw = 0.0;
  double peak_power_kw = 0.0;
  double computing_capacity_flops = 0.0;
  double heat_factor = 1.0;

  friend bool operator==(const ServerSpec&, const ServerSpec&) = default;
};

struct ChillerSpec {
  std::string id;
  double rated_capacity_kw = 0.0;
  double carnot_fraction = 0.0;
  double chw_supply_setpoint_c = 7.0;
  double rated_pump_fraction = 0.02;
  Vec3 size{3.0, 1.5, 2.0};

  friend bool operator==(const ChillerSpec&, const ChillerSpec&) = default;
};

struct TowerSpec {
  std::string id;
  double rated_heat_rejection_kw = 0.0;
  double rated_fan_power_kw = 0.0;
  double approach_k = 0.0;
  Vec3 size{4.0, 4.0, 4.0};

  friend bool operator==(const TowerSpec&, const TowerSpec&) = default;
};

using AssetSpec = std::variant<AcuSpec, RackSpec, ServerSpec, ChillerSpec, TowerSpec>;

AssetCategory category_of(const AssetSpec& asset);
const std::string& id_of(const AssetSpec& asset);

// Throws Error(Validation) naming the asset id and the violated invariant.
void validate(const AssetSpec& asset);

// Continuous parameters that participate in optimization and nearest-asset
// selection, in a fixed per-category order. Categorical fields (coolingType)
// and geometry are excluded.
//
//   Acu:          coolingCapacity, pressureRise, designAirFlowRate,
//                 designWaterFlowRate, designInletWaterTemperature,
//                 designOutletAirTemperature
//   Rack:         powerCapacity, serverSlots
//   Server:       idlePower, peakPower, computingCapacity, heatFactor
//   Chiller:      ratedCapacity, carnotFraction, chwSupplySetpoint, ratedPumpFraction
//   CoolingTower: ratedHeatRejection, ratedFanPower, approach
std::span<const std::string_view> parameter_fields(AssetCategory c);
std::vector<double> parameter_vector(const AssetSpec& asset);

// Writes `params` (in parameter_fields order) back into a copy of `asset`.
AssetSpec with_parameters(const AssetSpec& asset, std::span<const double> params);

namespace acu_param {
inline constexpr std::size_t kCoolingCapacity = 0;
inline constexpr std::size_t kPressureRise = 1;
inline constexpr std::size_t kDesignAirFlow = 2;
inline constexpr std::size_t kDesignWaterFlow = 3;
inline constexpr std::size_t kInletWaterTemp = 4;
inline constexpr std::size_t kOutletAirTemp = 5;
inline constexpr std::size_t kCount = 6;
}  // namespace acu_param

namespace chiller_param {
inline constexpr std::size_t kRatedCapacity = 0;
inline constexpr std::size_t kCarnotFraction = 1;
inline constexpr std::size_t kSupplySetpoint = 2;
inline constexpr std::size_t kPumpFraction = 3;
inline constexpr std::size_t kCount = 4;
}  // namespace chiller_param

namespace tower_param {
inline constexpr std::size_t kRatedRejection = 0;
inline constexpr std::size_t kRatedFanPower = 1;
inline constexpr std::size_t kApproach = 2;
inline constexpr std::size_t kCount = 3;
}  // namespace tower_param

// Immutable once built; assets of each category are kept sorted by id.
class AssetLibrary {
 public:
  AssetLibrary() = default;

  // Validates every asset; throws on invalid assets or duplicate ids.
  explicit AssetLibrary(std::vector<AssetSpec> assets);

  const std::vector<AcuSpec>& acus() const { return acus_; }
  const std::vector<RackSpec>& racks() const { return racks_; }
  const std::vector<ServerSpec>& servers() const { return servers_; }
  const std::vector<ChillerSpec>& chillers() const { return chillers_; }
  const std::vector<TowerSpec>& towers() const { return towers_; }

  const AcuSpec* find_acu(std::string_view id) const;
  const RackSpec* find_rack(std::string_view id) const;
  const ServerSpec* find_server(std::string_view id) const;
  const ChillerSpec* find_chiller(std::string_view id) const;
  const TowerSpec* find_tower(std::string_view id) const;
  std::optional<AssetSpec> find(std::string_view id) const;

  std::vector<AssetSpec> assets(AssetCategory c) const;
  std::size_t count(AssetCategory c) const;
  std::size_t size() const;

  // Every category non-empty: the precondition of a design run.
  bool usable() const;

  friend bool operator==(const AssetLibrary&, const AssetLibrary&) = default;

 private:
  std::vector<AcuSpec> acus_;
  std::vector<RackSpec> racks_;
  std::vector<ServerSpec> servers_;
  std::vector<ChillerSpec> chillers_;
  std::vector<TowerSpec> towers_;
};

AssetLibrary library_from_json(const nlohmann::json& doc);
nlohmann::json library_to_json(const AssetLibrary& library);
nlohmann::json asset_to_json(const AssetSpec& asset);

AssetLibrary load_library(const std::filesystem::path& path);
void save_library(const AssetLibrary& library, const std::filesystem::path& path);

// Per-field sampling ranges for the synthetic library.
//   ACU coolingCapacity        [50, 500] kW
//   ACU design air ΔT          [8, 14] K  (sets designAirFlowRate from capacity)
//   ACU maximumFlowRate        designAirFlowRate × [1.0, 1.3]
//   ACU pressureRise           [250, 800] Pa
//   ACU water ΔT               [5, 10] K  (sets designWaterFlowRate)
//   ACU inlet water            [7, 18] °C
//   ACU inlet / outlet air     [30, 40] / [18, 27] °C
//   Rack powerCapacity         [4, 12] kW,  serverSlots [8, 48]
//   Server idle / peak         [0.05, 0.15] / [idle + 0.05, 0.45] kW
//   Server heatFactor          [0.9, 1.0]
//   Chiller ratedCapacity      [100, 2500] kW, carnotFraction [0.35, 0.65]
//   Chiller chw setpoint       [6, 14] °C, pumpFraction [0.01, 0.04]
//   Tower ratedHeatRejection   [150, 3000] kW, fan power = rated × [0.008, 0.025]
//   Tower approach             [2.5, 6] K
AssetLibrary generate_synthetic_library(std::size_t n_per_type, std::uint64_t seed);

}  // namespace dcsynth
