#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcsynth/assets.hpp"
#include "json.hpp"

namespace dcsynth {

// Counts per model id within one room.
struct RoomTopology {
  std::map<std::string, int> racks;
  std::map<std::string, int> acus;

  friend bool operator==(const RoomTopology&, const RoomTopology&) = default;
};

struct SceneTopology {
  std::map<std::string, RoomTopology> rooms;
  std::map<std::string, int> chillers;  // plant.chilled_water_loop.chillers
  std::map<std::string, int> towers;    // plant.condenser_water_loop.cooling_towers

  friend bool operator==(const SceneTopology&, const SceneTopology&) = default;
};

// Spatial parameters of one data hall, in meters.
struct RoomLayout {
  double margin = 1.0;
  double padding = 0.5;
  double aisle_gap = 1.2;
  double rack_gap = 0.0;
  double acu_gap = 0.5;

  friend bool operator==(const RoomLayout&, const RoomLayout&) = default;
};

struct SpatialLayout {
  std::map<std::string, RoomLayout> rooms;

  friend bool operator==(const SpatialLayout&, const SpatialLayout&) = default;
};

// Topology and layout JSON shapes. The readers are strict: unknown keys,
// negative counts or non-integer counts throw Error(Parse).
nlohmann::json topology_to_json(const SceneTopology& t);
SceneTopology topology_from_json(const nlohmann::json& j);
nlohmann::json layout_to_json(const SpatialLayout& l);
SpatialLayout layout_from_json(const nlohmann::json& j);

// Stable textual identity of a topology, used to assert that refinement
// leaves the topology untouched.
std::string topology_fingerprint(const SceneTopology& t);

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double depth() const { return y1 - y0; }
  bool contains(const Rect& r, double tol = 1e-9) const {
    return r.x0 >= x0 - tol && r.y0 >= y0 - tol && r.x1 <= x1 + tol && r.y1 <= y1 + tol;
  }
  // Interiors intersect; shared edges do not count.
  bool overlaps(const Rect& r, double tol = 1e-9) const {
    return r.x0 < x1 - tol && x0 < r.x1 - tol && r.y0 < y1 - tol && y0 < r.y1 - tol;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct RoomDims {
  double width = 0.0;
  double depth = 0.0;

  friend bool operator==(const RoomDims&, const RoomDims&) = default;
};

inline constexpr const char* kPlantZone = "plant";

struct PlacedAsset {
  std::string instance_id;  // e.g. "hall_1/ACU_A#2"
  std::string slot;         // topology model id
  std::string asset_id;     // bound library asset
  AssetCategory category = AssetCategory::Rack;
  std::string room;         // room name, or kPlantZone
  Vec3 location;            // minimum corner of the bounding box
  Vec3 size;

  Rect footprint() const { return {location.x, location.y, location.x + size.x, location.y + size.y}; }

  friend bool operator==(const PlacedAsset&, const PlacedAsset&) = default;
};

// S = (topology, layout, assets). `slot_assets` binds every model id used in
// the topology to a concrete spec; refinement only rebinds slots.
struct Scene {
  SceneTopology topology;
  SpatialLayout layout;
  std::map<std::string, AssetSpec> slot_assets;
  ServerSpec server;
  int servers_per_rack = 8;
  std::vector<PlacedAsset> placed;
  std::map<std::string, RoomDims> room_dims;

  const AcuSpec& acu(const std::string& slot) const;
  const RackSpec& rack(const std::string& slot) const;
  const ChillerSpec& chiller(const std::string& slot) const;
  const TowerSpec& tower(const std::string& slot) const;

  // slot -> bound library asset id
  std::map<std::string, std::string> bindings() const;
};

// Maximum rack and ACU footprints of a room; sizes the rows and ACU strip.
struct RegionGeometry {
  Vec3 rack{0.6, 1.2, 2.0};
  Vec3 acu{0.995, 2.23, 2.0};
};

// Allowed placement rectangles (the feasible region) of one room: the
// interior after removing the margin + padding band, an ACU strip along the
// y = min wall, and rack rows separated by aisle_gap above the strip.
struct FeasibleRegion {
  Rect interior;
  Rect acu_strip;
  std::vector<Rect> rack_rows;

  bool contains_rack(const Rect& r) const;
  bool contains_acu(const Rect& r) const;
};

// Throws Error(DegenerateRoom) when the interior is empty or no rack row fits.
FeasibleRegion feasible_region(const RoomLayout& layout, RoomDims room,
                               const RegionGeometry& geometry = {});

// Bindings override the identity slot -> asset id mapping. The server model
// defaults to the library's first server by id.
Scene synthesize_scene(const SceneTopology& topology, const SpatialLayout& layout,
                       const AssetLibrary& library, int servers_per_rack = 8,
                       const std::string& server_model = {},
                       const std::map<std::string, std::string>& bindings = {});

// Re-places assets of an existing scene (used after slots were rebound).
Scene resynthesize(const Scene& scene, const AssetLibrary& library,
                   const std::map<std::string, std::string>& bindings);

struct Violation {
  std::string constraint;
  std::string message;
  double magnitude = 0.0;  // slack; negative means violated by that amount
};

struct ConstraintOptions {
  double min_aisle_clearance_m = 1.0;
};

struct ConstraintReport {
  bool syntax_valid = true;
  bool geometry_ok = true;
  bool power_ok = true;
  bool cooling_ok = true;
  bool layout_rules_ok = true;
  bool plant_ok = true;
  std::vector<Violation> violations;

  // Worst per-rack power slack and per-room cooling slack (kW, at u = 1).
  double min_power_slack_kw = 0.0;
  std::map<std::string, double> cooling_slack_kw;

  bool valid() const {
    return syntax_valid && geometry_ok && power_ok && cooling_ok && layout_rules_ok && plant_ok;
  }
};

ConstraintReport check_constraints(const Scene& scene, const AssetLibrary& library,
                                   const ConstraintOptions& options = {});

// Heat output of one room at full utilization, kW.
double room_rated_heat_kw(const Scene& scene, const std::string& room);

nlohmann::json scene_to_json(const Scene& scene);
// Rebuilds a scene from its exported topology/layout/bindings; the exported
// geometry is recomputed, not trusted.
Scene scene_from_json(const nlohmann::json& j, const AssetLibrary& library);

}  // namespace dcsynth
