#include "dcsynth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "dcsynth/error.hpp"

namespace dcsynth {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON shapes

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::Parse, what); }

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      parse_fail("unknown key '" + key + "' in " + where);
    }
  }
}

const json& require_object(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(std::string("missing '") + key + "' in " + where);
  if (!it->is_object()) parse_fail(std::string("'") + key + "' in " + where + " must be an object");
  return *it;
}

std::map<std::string, int> counts_from_json(const json& obj, const std::string& where) {
  std::map<std::string, int> out;
  for (const auto& [model, value] : obj.items()) {
    if (!value.is_number()) parse_fail("count of '" + model + "' in " + where + " must be a number");
    const double v = value.get<double>();
    if (v != std::floor(v) || !std::isfinite(v)) {
      parse_fail("count of '" + model + "' in " + where + " must be an integer");
    }
    if (v < 0) parse_fail("count of '" + model + "' in " + where + " must be >= 0");
    if (v > 1e6) parse_fail("count of '" + model + "' in " + where + " is unreasonably large");
    out[model] = static_cast<int>(v);
  }
  return out;
}

json counts_to_json(const std::map<std::string, int>& counts) {
  json j = json::object();
  for (const auto& [model, n] : counts) j[model] = n;
  return j;
}

}  // namespace

json topology_to_json(const SceneTopology& t) {
  json rooms = json::object();
  for (const auto& [name, room] : t.rooms) {
    rooms[name] = {{"racks", counts_to_json(room.racks)}, {"acus", counts_to_json(room.acus)}};
  }
  return {{"rooms", rooms},
          {"plant",
           {{"chilled_water_loop", {{"chillers", counts_to_json(t.chillers)}}},
            {"condenser_water_loop", {{"cooling_towers", counts_to_json(t.towers)}}}}}};
}

SceneTopology topology_from_json(const json& j) {
  if (!j.is_object()) parse_fail("topology must be a JSON object");
  reject_unknown_keys(j, {"rooms", "plant"}, "topology");
  SceneTopology t;
  const json& rooms = require_object(j, "rooms", "topology");
  for (const auto& [name, room] : rooms.items()) {
    const std::string where = "room '" + name + "'";
    if (!room.is_object()) parse_fail(where + " must be an object");
    reject_unknown_keys(room, {"racks", "acus"}, where);
    RoomTopology rt;
    rt.racks = counts_from_json(require_object(room, "racks", where), where + " racks");
    rt.acus = counts_from_json(require_object(room, "acus", where), where + " acus");
    t.rooms.emplace(name, std::move(rt));
  }
  if (auto it = j.find("plant"); it != j.end()) {
    if (!it->is_object()) parse_fail("'plant' must be an object");
    reject_unknown_keys(*it, {"chilled_water_loop", "condenser_water_loop"}, "plant");
    if (it->contains("chilled_water_loop")) {
      const json& loop = require_object(*it, "chilled_water_loop", "plant");
      reject_unknown_keys(loop, {"chillers"}, "chilled_water_loop");
      t.chillers = counts_from_json(require_object(loop, "chillers", "chilled_water_loop"),
                                    "chillers");
    }
    if (it->contains("condenser_water_loop")) {
      const json& loop = require_object(*it, "condenser_water_loop", "plant");
      reject_unknown_keys(loop, {"cooling_towers"}, "condenser_water_loop");
      t.towers = counts_from_json(
          require_object(loop, "cooling_towers", "condenser_water_loop"), "cooling_towers");
    }
  }
  return t;
}

json layout_to_json(const SpatialLayout& l) {
  json rooms = json::object();
  for (const auto& [name, d] : l.rooms) {
    rooms[name] = {{"rack_gap", d.rack_gap},
                   {"padding", d.padding},
                   {"margin", d.margin},
                   {"aisle_gap", d.aisle_gap},
                   {"acu_gap", d.acu_gap}};
  }
  return {{"rooms", rooms}};
}

SpatialLayout layout_from_json(const json& j) {
  if (!j.is_object()) parse_fail("layout must be a JSON object");
  reject_unknown_keys(j, {"rooms"}, "layout");
  SpatialLayout l;
  for (const auto& [name, room] : require_object(j, "rooms", "layout").items()) {
    const std::string where = "layout of room '" + name + "'";
    if (!room.is_object()) parse_fail(where + " must be an object");
    reject_unknown_keys(room, {"rack_gap", "padding", "margin", "aisle_gap", "acu_gap"}, where);
    RoomLayout d;
    auto read = [&](const char* key, double& dst, bool required) {
      auto it = room.find(key);
      if (it == room.end()) {
        if (required) parse_fail(std::string("missing '") + key + "' in " + where);
        return;
      }
      if (!it->is_number()) parse_fail(std::string("'") + key + "' in " + where + " must be a number");
      dst = it->get<double>();
    };
    read("rack_gap", d.rack_gap, true);
    read("padding", d.padding, true);
    read("margin", d.margin, true);
    read("aisle_gap", d.aisle_gap, true);
    read("acu_gap", d.acu_gap, false);
    l.rooms.emplace(name, d);
  }
  return l;
}

std::string topology_fingerprint(const SceneTopology& t) { return topology_to_json(t).dump(); }

// ---------------------------------------------------------------------------
// Scene accessors

namespace {

template <class Spec>
const Spec& slot_as(const std::map<std::string, AssetSpec>& slots, const std::string& slot) {
  auto it = slots.find(slot);
  if (it == slots.end() || !std::holds_alternative<Spec>(it->second)) {
    throw Error(ErrorKind::UnknownModel, "scene has no asset bound to slot '" + slot + "'");
  }
  return std::get<Spec>(it->second);
}

}  // namespace

const AcuSpec& Scene::acu(const std::string& slot) const { return slot_as<AcuSpec>(slot_assets, slot); }
const RackSpec& Scene::rack(const std::string& slot) const {
  return slot_as<RackSpec>(slot_assets, slot);
}
const ChillerSpec& Scene::chiller(const std::string& slot) const {
  return slot_as<ChillerSpec>(slot_assets, slot);
}
const TowerSpec& Scene::tower(const std::string& slot) const {
  return slot_as<TowerSpec>(slot_assets, slot);
}

std::map<std::string, std::string> Scene::bindings() const {
  std::map<std::string, std::string> out;
  for (const auto& [slot, asset] : slot_assets) out[slot] = id_of(asset);
  return out;
}

// ---------------------------------------------------------------------------
// Feasible region

bool FeasibleRegion::contains_rack(const Rect& r) const {
  if (!interior.contains(r)) return false;
  return std::any_of(rack_rows.begin(), rack_rows.end(),
                     [&](const Rect& row) { return row.contains(r); });
}

bool FeasibleRegion::contains_acu(const Rect& r) const {
  return interior.contains(r) && acu_strip.contains(r);
}

FeasibleRegion feasible_region(const RoomLayout& layout, RoomDims room,
                               const RegionGeometry& geometry) {
  const double band = layout.margin + layout.padding;
  FeasibleRegion region;
  region.interior = {band, band, room.width - band, room.depth - band};
  if (!(region.interior.width() > 0.0) || !(region.interior.depth() > 0.0)) {
    throw Error(ErrorKind::DegenerateRoom, "room interior is empty after margin and padding");
  }
  region.acu_strip = {region.interior.x0, region.interior.y0, region.interior.x1,
                      region.interior.y0 + geometry.acu.y};
  const double pitch = geometry.rack.y + layout.aisle_gap;
  if (!(pitch > 0.0)) throw Error(ErrorKind::DegenerateRoom, "rack row pitch is not positive");
  const double first = region.acu_strip.y1 + layout.aisle_gap;
  constexpr std::size_t kMaxRows = 100000;
  for (std::size_t r = 0; r < kMaxRows; ++r) {
    const double y0 = first + static_cast<double>(r) * pitch;
    const double y1 = y0 + geometry.rack.y;
    if (y1 > region.interior.y1 + 1e-9) break;
    region.rack_rows.push_back({region.interior.x0, y0, region.interior.x1, y1});
  }
  if (region.rack_rows.empty()) throw Error(ErrorKind::DegenerateRoom, "no rack row fits in the room");
  return region;
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

int total(const std::map<std::string, int>& counts) {
  return std::accumulate(counts.begin(), counts.end(), 0,
                         [](int acc, const auto& kv) { return acc + kv.second; });
}

std::string bound_id(const std::map<std::string, std::string>& bindings, const std::string& slot) {
  auto it = bindings.find(slot);
  return it == bindings.end() ? slot : it->second;
}

template <class Spec, class Finder>
const Spec& resolve(Finder find, const std::map<std::string, std::string>& bindings,
                    const std::string& slot, std::string_view category,
                    std::map<std::string, AssetSpec>& out) {
  const std::string id = bound_id(bindings, slot);
  const Spec* spec = find(id);
  if (spec == nullptr) {
    throw Error(ErrorKind::UnknownModel,
                "unknown " + std::string(category) + " model '" + id + "'");
  }
  auto [it, inserted] = out.emplace(slot, *spec);
  if (!inserted && !std::holds_alternative<Spec>(it->second)) {
    throw Error(ErrorKind::UnknownModel,
                "model id '" + slot + "' used for more than one asset category");
  }
  return std::get<Spec>(it->second);
}

RegionGeometry room_geometry(const Scene& scene, const RoomTopology& room) {
  RegionGeometry g;
  g.rack = {0.0, 0.0, 0.0};
  g.acu = {0.0, 0.0, 0.0};
  for (const auto& [slot, n] : room.racks) {
    if (n <= 0) continue;
    const Vec3& s = scene.rack(slot).size;
    g.rack = {std::max(g.rack.x, s.x), std::max(g.rack.y, s.y), std::max(g.rack.z, s.z)};
  }
  for (const auto& [slot, n] : room.acus) {
    if (n <= 0) continue;
    const Vec3& s = scene.acu(slot).size;
    g.acu = {std::max(g.acu.x, s.x), std::max(g.acu.y, s.y), std::max(g.acu.z, s.z)};
  }
  return g;
}

void place_room(Scene& scene, const std::string& name, const RoomTopology& room,
                const RoomLayout& d) {
  const RegionGeometry g = room_geometry(scene, room);
  const int n_racks = total(room.racks);
  const int n_acus = total(room.acus);
  const double band = d.margin + d.padding;

  const int cols = n_racks > 0 ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_racks)))) : 0;
  const int rows = cols > 0 ? (n_racks + cols - 1) / cols : 0;

  const double rack_block_w = cols > 0 ? cols * g.rack.x + (cols - 1) * d.rack_gap : 0.0;
  const double acu_block_w = n_acus > 0 ? n_acus * g.acu.x + (n_acus - 1) * d.acu_gap : 0.0;
  const double rack_block_d = rows > 0 ? rows * g.rack.y + (rows - 1) * d.aisle_gap : 0.0;
  const double first_row_y = band + g.acu.y + d.aisle_gap;

  RoomDims dims;
  dims.width = 2.0 * band + std::max(rack_block_w, acu_block_w);
  dims.depth = 2.0 * band + g.acu.y + d.aisle_gap + rack_block_d;
  scene.room_dims[name] = dims;

  int k = 0;
  for (const auto& [slot, n] : room.racks) {
    const RackSpec& spec = scene.rack(slot);
    for (int i = 0; i < n; ++i, ++k) {
      const int row = k / cols;
      const int col = k % cols;
      PlacedAsset p;
      p.instance_id = name + "/" + slot + "#" + std::to_string(i + 1);
      p.slot = slot;
      p.asset_id = spec.id;
      p.category = AssetCategory::Rack;
      p.room = name;
      p.location = {band + col * (g.rack.x + d.rack_gap), first_row_y + row * (g.rack.y + d.aisle_gap), 0.0};
      p.size = spec.size;
      scene.placed.push_back(std::move(p));
    }
  }

  k = 0;
  for (const auto& [slot, n] : room.acus) {
    const AcuSpec& spec = scene.acu(slot);
    for (int i = 0; i < n; ++i, ++k) {
      PlacedAsset p;
      p.instance_id = name + "/" + slot + "#" + std::to_string(i + 1);
      p.slot = slot;
      p.asset_id = spec.id;
      p.category = AssetCategory::Acu;
      p.room = name;
      p.location = {band + k * (g.acu.x + d.acu_gap), band, 0.0};
      p.size = spec.size;
      scene.placed.push_back(std::move(p));
    }
  }
}

void place_plant(Scene& scene) {
  constexpr double kGap = 1.0;
  double x = 0.0;
  double row_depth = 0.0;
  for (const auto& [slot, n] : scene.topology.chillers) {
    const ChillerSpec& spec = scene.chiller(slot);
    for (int i = 0; i < n; ++i) {
      scene.placed.push_back({std::string(kPlantZone) + "/" + slot + "#" + std::to_string(i + 1), slot,
                              spec.id, AssetCategory::Chiller, kPlantZone, {x, 0.0, 0.0}, spec.size});
      x += spec.size.x + kGap;
      row_depth = std::max(row_depth, spec.size.y);
    }
  }
  x = 0.0;
  const double y = row_depth + kGap;
  for (const auto& [slot, n] : scene.topology.towers) {
    const TowerSpec& spec = scene.tower(slot);
    for (int i = 0; i < n; ++i) {
      scene.placed.push_back({std::string(kPlantZone) + "/" + slot + "#" + std::to_string(i + 1), slot,
                              spec.id, AssetCategory::CoolingTower, kPlantZone, {x, y, 0.0},
                              spec.size});
      x += spec.size.x + kGap;
    }
  }
}

}  // namespace

Scene synthesize_scene(const SceneTopology& topology, const SpatialLayout& layout,
                       const AssetLibrary& library, int servers_per_rack,
                       const std::string& server_model,
                       const std::map<std::string, std::string>& bindings) {
  if (topology.rooms.empty()) throw Error(ErrorKind::EmptyRoom, "room must contain assets");
  if (servers_per_rack < 1) throw Error(ErrorKind::Validation, "servers_per_rack must be >= 1");

  Scene scene;
  scene.topology = topology;
  scene.layout = layout;
  scene.servers_per_rack = servers_per_rack;

  if (server_model.empty()) {
    if (library.servers().empty()) throw Error(ErrorKind::UnknownModel, "library has no server model");
    scene.server = library.servers().front();
  } else {
    const ServerSpec* s = library.find_server(server_model);
    if (s == nullptr) throw Error(ErrorKind::UnknownModel, "unknown server model '" + server_model + "'");
    scene.server = *s;
  }

  auto find_rack = [&](std::string_view id) { return library.find_rack(id); };
  auto find_acu = [&](std::string_view id) { return library.find_acu(id); };
  auto find_chiller = [&](std::string_view id) { return library.find_chiller(id); };
  auto find_tower = [&](std::string_view id) { return library.find_tower(id); };

  for (const auto& [name, room] : topology.rooms) {
    if (total(room.racks) + total(room.acus) == 0) {
      throw Error(ErrorKind::EmptyRoom, "room must contain assets: '" + name + "' is empty");
    }
    if (!layout.rooms.contains(name)) {
      throw Error(ErrorKind::InvalidScene, "no layout given for room '" + name + "'");
    }
    for (const auto& [slot, _] : room.racks) {
      resolve<RackSpec>(find_rack, bindings, slot, "rack", scene.slot_assets);
    }
    for (const auto& [slot, _] : room.acus) {
      resolve<AcuSpec>(find_acu, bindings, slot, "ACU", scene.slot_assets);
    }
  }
  for (const auto& [slot, _] : topology.chillers) {
    resolve<ChillerSpec>(find_chiller, bindings, slot, "chiller", scene.slot_assets);
  }
  for (const auto& [slot, _] : topology.towers) {
    resolve<TowerSpec>(find_tower, bindings, slot, "cooling tower", scene.slot_assets);
  }

  for (const auto& [name, room] : topology.rooms) place_room(scene, name, room, layout.rooms.at(name));
  place_plant(scene);
  return scene;
}

Scene resynthesize(const Scene& scene, const AssetLibrary& library,
                   const std::map<std::string, std::string>& bindings) {
  return synthesize_scene(scene.topology, scene.layout, library, scene.servers_per_rack,
                          scene.server.id, bindings);
}

double room_rated_heat_kw(const Scene& scene, const std::string& room) {
  const RoomTopology& rt = scene.topology.rooms.at(room);
  const double per_server = scene.server.peak_power_kw * scene.server.heat_factor;
  return static_cast<double>(total(rt.racks)) * scene.servers_per_rack * per_server;
}

// ---------------------------------------------------------------------------
// Constraint checking

namespace {

constexpr double kTol = 1e-9;

void add(ConstraintReport& r, bool& flag, std::string id, std::string message, double magnitude) {
  flag = false;
  r.violations.push_back({std::move(id), std::move(message), magnitude});
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Counts pairs of overlapping footprints with a sweep along x.
std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(const std::vector<Rect>& rects) {
  std::vector<std::size_t> order(rects.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rects[a].x0 < rects[b].x0; });
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Rect& a = rects[order[i]];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Rect& b = rects[order[j]];
      if (b.x0 >= a.x1 - kTol) break;
      if (a.overlaps(b, kTol)) pairs.emplace_back(std::min(order[i], order[j]), std::max(order[i], order[j]));
    }
  }
  return pairs;
}

void check_geometry(const Scene& scene, const ConstraintOptions& options, ConstraintReport& report) {
  for (const auto& [name, room] : scene.topology.rooms) {
    const RoomLayout& d = scene.layout.rooms.at(name);
    for (auto [key, value] : {std::pair{"margin", d.margin}, std::pair{"padding", d.padding},
                              std::pair{"aisle_gap", d.aisle_gap}, std::pair{"rack_gap", d.rack_gap},
                              std::pair{"acu_gap", d.acu_gap}}) {
      if (!(value >= 0.0)) {
        add(report, report.geometry_ok, "geometry.gap",
            "room '" + name + "': " + key + " must be >= 0 (got " + fmt(value) + ")", value);
      }
    }
    if (d.aisle_gap < options.min_aisle_clearance_m) {
      add(report, report.geometry_ok, "geometry.aisle_clearance",
          "room '" + name + "': aisle_gap " + fmt(d.aisle_gap) + " m below minimum clearance " +
              fmt(options.min_aisle_clearance_m) + " m",
          d.aisle_gap - options.min_aisle_clearance_m);
    }

    std::vector<const PlacedAsset*> in_room;
    for (const auto& p : scene.placed) {
      if (p.room == name) in_room.push_back(&p);
    }

    std::optional<FeasibleRegion> region;
    try {
      region = feasible_region(d, scene.room_dims.at(name), room_geometry(scene, room));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateRoom) throw;
      add(report, report.geometry_ok, "geometry.region", "room '" + name + "': " + e.what(), -1.0);
    }
    if (region) {
      std::size_t outside = 0;
      for (const PlacedAsset* p : in_room) {
        const Rect fp = p->footprint();
        const bool inside = p->category == AssetCategory::Acu ? region->contains_acu(fp)
                                                              : region->contains_rack(fp);
        if (!inside) ++outside;
      }
      if (outside > 0) {
        add(report, report.geometry_ok, "geometry.region",
            "room '" + name + "': " + std::to_string(outside) + " assets outside the feasible region",
            -static_cast<double>(outside));
      }
    }

    std::vector<Rect> rects;
    rects.reserve(in_room.size());
    for (const PlacedAsset* p : in_room) rects.push_back(p->footprint());
    const auto pairs = overlapping_pairs(rects);
    if (!pairs.empty()) {
      const PlacedAsset& a = *in_room[pairs.front().first];
      const PlacedAsset& b = *in_room[pairs.front().second];
      add(report, report.geometry_ok, "geometry.overlap",
          "room '" + name + "': " + std::to_string(pairs.size()) + " overlapping pairs (first: " +
              a.instance_id + " and " + b.instance_id + ")",
          -static_cast<double>(pairs.size()));
    }
  }
}

}  // namespace

ConstraintReport check_constraints(const Scene& scene, const AssetLibrary& library,
                                   const ConstraintOptions& options) {
  ConstraintReport report;

  for (const auto& [slot, asset] : scene.slot_assets) {
    if (!library.find(id_of(asset))) {
      add(report, report.syntax_valid, "syntax.unknown_model",
          "slot '" + slot + "' bound to unknown asset '" + id_of(asset) + "'", 0.0);
    }
  }
  for (const auto& [name, _] : scene.topology.rooms) {
    if (!scene.layout.rooms.contains(name)) {
      add(report, report.syntax_valid, "syntax.layout", "no layout for room '" + name + "'", 0.0);
    }
  }
  if (!report.syntax_valid) return report;

  check_geometry(scene, options, report);

  const double server_peak = scene.server.peak_power_kw;
  report.min_power_slack_kw = std::numeric_limits<double>::infinity();
  for (const auto& [name, room] : scene.topology.rooms) {
    for (const auto& [slot, n] : room.racks) {
      if (n <= 0) continue;
      const double demand = scene.servers_per_rack * server_peak;
      const double slack = scene.rack(slot).power_capacity_kw - demand;
      report.min_power_slack_kw = std::min(report.min_power_slack_kw, slack);
      if (slack < -kTol) {
        add(report, report.power_ok, "power.rack",
            "room '" + name + "': rack '" + slot + "' hosts " + fmt(demand) + " kW of servers, capacity " +
                fmt(scene.rack(slot).power_capacity_kw) + " kW",
            slack);
      }
    }

    const double heat = room_rated_heat_kw(scene, name);
    double capacity = 0.0;
    for (const auto& [slot, n] : room.acus) capacity += n * scene.acu(slot).cooling_capacity_kw;
    const double slack = capacity - heat;
    report.cooling_slack_kw[name] = slack;
    if (slack < -kTol * std::max(1.0, heat)) {
      add(report, report.cooling_ok, "cooling.room",
          "room '" + name + "': heat " + fmt(heat) + " kW exceeds ACU capacity " + fmt(capacity) + " kW",
          slack);
    }

    const int racks = total(room.racks);
    const int acus = total(room.acus);
    if (acus % 2 != 0) {
      add(report, report.layout_rules_ok, "layout.acu_multiple",
          "room '" + name + "': ACU count " + std::to_string(acus) + " is not a multiple of 2", -1.0);
    }
    if (racks % 4 != 0) {
      add(report, report.layout_rules_ok, "layout.rack_multiple",
          "room '" + name + "': rack count " + std::to_string(racks) + " is not a multiple of 4",
          -static_cast<double>(racks % 4));
    }
    if (racks < 16) {
      add(report, report.layout_rules_ok, "layout.rack_min",
          "room '" + name + "': " + std::to_string(racks) + " racks, at least 16 required",
          static_cast<double>(racks - 16));
    }
    if (acus < 2) {
      add(report, report.layout_rules_ok, "layout.acu_min",
          "room '" + name + "': " + std::to_string(acus) + " ACUs, at least 2 required",
          static_cast<double>(acus - 2));
    }
  }
  if (!std::isfinite(report.min_power_slack_kw)) report.min_power_slack_kw = 0.0;

  if (total(scene.topology.chillers) < 1) {
    add(report, report.plant_ok, "plant.chiller", "plant has no chiller", -1.0);
  }
  if (total(scene.topology.towers) < 1) {
    add(report, report.plant_ok, "plant.tower", "plant has no cooling tower", -1.0);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Scene export

namespace {

json vec_json(const Vec3& v) { return {{"x", v.x}, {"y", v.y}, {"z", v.z}}; }

}  // namespace

json scene_to_json(const Scene& scene) {
  json assets = json::object();
  for (const auto& [slot, id] : scene.bindings()) assets[slot] = id;
  json rooms = json::object();
  for (const auto& [name, dims] : scene.room_dims) {
    rooms[name] = {{"width", dims.width}, {"depth", dims.depth}};
  }
  json geometry = json::array();
  for (const auto& p : scene.placed) {
    geometry.push_back({{p.instance_id,
                         {{"asset", p.asset_id},
                          {"room", p.room},
                          {"location", vec_json(p.location)},
                          {"size", vec_json(p.size)}}}});
  }
  return {{"topology", topology_to_json(scene.topology)},
          {"layout", layout_to_json(scene.layout)},
          {"assets", assets},
          {"server_model", scene.server.id},
          {"servers_per_rack", scene.servers_per_rack},
          {"rooms", rooms},
          {"geometry", geometry}};
}

Scene scene_from_json(const json& j, const AssetLibrary& library) {
  if (!j.is_object() || !j.contains("topology") || !j.contains("layout")) {
    throw Error(ErrorKind::Parse, "scene JSON needs 'topology' and 'layout'");
  }
  std::map<std::string, std::string> bindings;
  if (auto it = j.find("assets"); it != j.end()) {
    for (const auto& [slot, id] : it->items()) {
      if (!id.is_string()) throw Error(ErrorKind::Parse, "asset binding for '" + slot + "' must be a string");
      bindings[slot] = id.get<std::string>();
    }
  }
  const int spr = j.value("servers_per_rack", 8);
  const std::string server = j.value("server_model", std::string{});
  return synthesize_scene(topology_from_json(j.at("topology")), layout_from_json(j.at("layout")),
                          library, spr, server, bindings);
}

}  // namespace dcsynth
