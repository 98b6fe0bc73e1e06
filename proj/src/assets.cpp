#include "dcsynth/assets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dcsynth/error.hpp"
#include "dcsynth/random.hpp"

namespace dcsynth {

using nlohmann::json;

std::string_view to_string(AssetCategory c) {
  switch (c) {
    case AssetCategory::Acu: return "acu";
    case AssetCategory::Rack: return "rack";
    case AssetCategory::Server: return "server";
    case AssetCategory::Chiller: return "chiller";
    case AssetCategory::CoolingTower: return "cooling_tower";
  }
  return "unknown";
}

std::string_view section_name(AssetCategory c) {
  switch (c) {
    case AssetCategory::Acu: return "acus";
    case AssetCategory::Rack: return "racks";
    case AssetCategory::Server: return "servers";
    case AssetCategory::Chiller: return "chillers";
    case AssetCategory::CoolingTower: return "cooling_towers";
  }
  return "unknown";
}

std::optional<AssetCategory> category_from_section(std::string_view section) {
  for (AssetCategory c : kAllCategories) {
    if (section_name(c) == section) return c;
  }
  return std::nullopt;
}

AssetCategory category_of(const AssetSpec& asset) {
  return static_cast<AssetCategory>(asset.index());
}

const std::string& id_of(const AssetSpec& asset) {
  return std::visit([](const auto& a) -> const std::string& { return a.id; }, asset);
}

namespace {

[[noreturn]] void invalid(const std::string& id, const std::string& what) {
  throw Error(ErrorKind::Validation, "asset '" + id + "': " + what);
}

void require_positive(const std::string& id, std::string_view field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(id, std::string(field) + " must be > 0");
}

void require_finite(const std::string& id, std::string_view field, double v) {
  if (!std::isfinite(v)) invalid(id, std::string(field) + " must be finite");
}

void validate_size(const std::string& id, const Vec3& s) {
  if (!(s.x > 0.0) || !(s.y > 0.0)) invalid(id, "size.x and size.y must be > 0");
  if (s.z < 0.0) invalid(id, "size.z must be >= 0");
}

void validate_one(const AcuSpec& a) {
  if (a.id.empty()) invalid(a.id, "id must be non-empty");
  require_positive(a.id, "coolingCapacity", a.cooling_capacity_kw);
  require_positive(a.id, "pressureRise", a.pressure_rise_pa);
  require_positive(a.id, "designWaterFlowRate", a.design_water_flow_m3s);
  require_positive(a.id, "designAirFlowRate", a.design_air_flow_m3s);
  require_positive(a.id, "maximumFlowRate", a.maximum_flow_m3s);
  require_positive(a.id, "designWaterTemperatureDifference", a.design_water_delta_k);
  require_finite(a.id, "designInletWaterTemperature", a.design_inlet_water_c);
  require_finite(a.id, "designOutletWaterTemperature", a.design_outlet_water_c);
  require_finite(a.id, "designInletAirTemperature", a.design_inlet_air_c);
  require_finite(a.id, "designOutletAirTemperature", a.design_outlet_air_c);
  if (!(a.design_outlet_water_c > a.design_inlet_water_c)) {
    invalid(a.id, "designOutletWaterTemperature must be > designInletWaterTemperature");
  }
  if (!(a.design_inlet_air_c > a.design_outlet_air_c)) {
    invalid(a.id, "designInletAirTemperature must be > designOutletAirTemperature");
  }
  validate_size(a.id, a.size);
}

void validate_one(const RackSpec& r) {
  if (r.id.empty()) invalid(r.id, "id must be non-empty");
  require_positive(r.id, "powerCapacity", r.power_capacity_kw);
  if (r.server_slots < 1) invalid(r.id, "serverSlots must be >= 1");
  validate_size(r.id, r.size);
}

void validate_one(const ServerSpec& s) {
  if (s.id.empty()) invalid(s.id, "id must be non-empty");
  require_positive(s.id, "idlePower", s.idle_power_kw);
  require_positive(s.id, "peakPower", s.peak_power_kw);
  if (s.idle_power_kw > s.peak_power_kw) invalid(s.id, "idlePower must be <= peakPower");
  if (!(s.heat_factor > 0.0 && s.heat_factor <= 1.0)) invalid(s.id, "heatFactor must be in (0, 1]");
  if (s.computing_capacity_flops < 0.0) invalid(s.id, "computingCapacity must be >= 0");
}

void validate_one(const ChillerSpec& c) {
  if (c.id.empty()) invalid(c.id, "id must be non-empty");
  require_positive(c.id, "ratedCapacity", c.rated_capacity_kw);
  if (!(c.carnot_fraction > 0.0 && c.carnot_fraction < 1.0)) {
    invalid(c.id, "carnotFraction must be in (0, 1)");
  }
  require_finite(c.id, "chwSupplySetpoint", c.chw_supply_setpoint_c);
  if (!(c.rated_pump_fraction >= 0.0)) invalid(c.id, "ratedPumpFraction must be >= 0");
}

void validate_one(const TowerSpec& t) {
  if (t.id.empty()) invalid(t.id, "id must be non-empty");
  require_positive(t.id, "ratedHeatRejection", t.rated_heat_rejection_kw);
  if (!(t.rated_fan_power_kw >= 0.0)) invalid(t.id, "ratedFanPower must be >= 0");
  require_positive(t.id, "approach", t.approach_k);
}

constexpr std::array<std::string_view, 6> kAcuFields = {
    "coolingCapacity",   "pressureRise",         "designAirFlowRate",
    "designWaterFlowRate", "designInletWaterTemperature", "designOutletAirTemperature"};
constexpr std::array<std::string_view, 2> kRackFields = {"powerCapacity", "serverSlots"};
constexpr std::array<std::string_view, 4> kServerFields = {"idlePower", "peakPower",
                                                           "computingCapacity", "heatFactor"};
constexpr std::array<std::string_view, 4> kChillerFields = {
    "ratedCapacity", "carnotFraction", "chwSupplySetpoint", "ratedPumpFraction"};
constexpr std::array<std::string_view, 3> kTowerFields = {"ratedHeatRejection", "ratedFanPower",
                                                          "approach"};

}  // namespace

void validate(const AssetSpec& asset) {
  std::visit([](const auto& a) { validate_one(a); }, asset);
}

std::span<const std::string_view> parameter_fields(AssetCategory c) {
  switch (c) {
    case AssetCategory::Acu: return kAcuFields;
    case AssetCategory::Rack: return kRackFields;
    case AssetCategory::Server: return kServerFields;
    case AssetCategory::Chiller: return kChillerFields;
    case AssetCategory::CoolingTower: return kTowerFields;
  }
  return {};
}

std::vector<double> parameter_vector(const AssetSpec& asset) {
  struct Visitor {
    std::vector<double> operator()(const AcuSpec& a) const {
      return {a.cooling_capacity_kw,   a.pressure_rise_pa,      a.design_air_flow_m3s,
              a.design_water_flow_m3s, a.design_inlet_water_c, a.design_outlet_air_c};
    }
    std::vector<double> operator()(const RackSpec& r) const {
      return {r.power_capacity_kw, static_cast<double>(r.server_slots)};
    }
    std::vector<double> operator()(const ServerSpec& s) const {
      return {s.idle_power_kw, s.peak_power_kw, s.computing_capacity_flops, s.heat_factor};
    }
    std::vector<double> operator()(const ChillerSpec& c) const {
      return {c.rated_capacity_kw, c.carnot_fraction, c.chw_supply_setpoint_c,
              c.rated_pump_fraction};
    }
    std::vector<double> operator()(const TowerSpec& t) const {
      return {t.rated_heat_rejection_kw, t.rated_fan_power_kw, t.approach_k};
    }
  };
  return std::visit(Visitor{}, asset);
}

AssetSpec with_parameters(const AssetSpec& asset, std::span<const double> p) {
  if (p.size() != parameter_fields(category_of(asset)).size()) {
    throw Error(ErrorKind::Validation,
                "parameter vector length mismatch for asset '" + id_of(asset) + "'");
  }
  struct Visitor {
    std::span<const double> p;
    AssetSpec operator()(AcuSpec a) const {
      a.cooling_capacity_kw = p[0];
      a.pressure_rise_pa = p[1];
      a.design_air_flow_m3s = p[2];
      a.design_water_flow_m3s = p[3];
      a.design_inlet_water_c = p[4];
      a.design_outlet_air_c = p[5];
      return a;
    }
    AssetSpec operator()(RackSpec r) const {
      r.power_capacity_kw = p[0];
      r.server_slots = static_cast<int>(std::lround(p[1]));
      return r;
    }
    AssetSpec operator()(ServerSpec s) const {
      s.idle_power_kw = p[0];
      s.peak_power_kw = p[1];
      s.computing_capacity_flops = p[2];
      s.heat_factor = p[3];
      return s;
    }
    AssetSpec operator()(ChillerSpec c) const {
      c.rated_capacity_kw = p[0];
      c.carnot_fraction = p[1];
      c.chw_supply_setpoint_c = p[2];
      c.rated_pump_fraction = p[3];
      return c;
    }
    AssetSpec operator()(TowerSpec t) const {
      t.rated_heat_rejection_kw = p[0];
      t.rated_fan_power_kw = p[1];
      t.approach_k = p[2];
      return t;
    }
  };
  return std::visit(Visitor{p}, asset);
}

// ---------------------------------------------------------------------------
// AssetLibrary

AssetLibrary::AssetLibrary(std::vector<AssetSpec> assets) {
  std::set<std::string, std::less<>> seen;
  for (auto& asset : assets) {
    validate(asset);
    if (!seen.insert(id_of(asset)).second) {
      throw Error(ErrorKind::Validation, "duplicate asset id '" + id_of(asset) + "'");
    }
    std::visit(
        [this](auto&& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, AcuSpec>) acus_.push_back(std::move(a));
          if constexpr (std::is_same_v<T, RackSpec>) racks_.push_back(std::move(a));
          if constexpr (std::is_same_v<T, ServerSpec>) servers_.push_back(std::move(a));
          if constexpr (std::is_same_v<T, ChillerSpec>) chillers_.push_back(std::move(a));
          if constexpr (std::is_same_v<T, TowerSpec>) towers_.push_back(std::move(a));
        },
        std::move(asset));
  }
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(acus_.begin(), acus_.end(), by_id);
  std::sort(racks_.begin(), racks_.end(), by_id);
  std::sort(servers_.begin(), servers_.end(), by_id);
  std::sort(chillers_.begin(), chillers_.end(), by_id);
  std::sort(towers_.begin(), towers_.end(), by_id);
}

namespace {

template <class Spec>
const Spec* find_sorted(const std::vector<Spec>& v, std::string_view id) {
  auto it = std::lower_bound(v.begin(), v.end(), id,
                             [](const Spec& s, std::string_view key) { return s.id < key; });
  return it != v.end() && it->id == id ? &*it : nullptr;
}

}  // namespace

const AcuSpec* AssetLibrary::find_acu(std::string_view id) const { return find_sorted(acus_, id); }
const RackSpec* AssetLibrary::find_rack(std::string_view id) const {
  return find_sorted(racks_, id);
}
const ServerSpec* AssetLibrary::find_server(std::string_view id) const {
  return find_sorted(servers_, id);
}
const ChillerSpec* AssetLibrary::find_chiller(std::string_view id) const {
  return find_sorted(chillers_, id);
}
const TowerSpec* AssetLibrary::find_tower(std::string_view id) const {
  return find_sorted(towers_, id);
}

std::optional<AssetSpec> AssetLibrary::find(std::string_view id) const {
  if (const auto* a = find_acu(id)) return *a;
  if (const auto* r = find_rack(id)) return *r;
  if (const auto* s = find_server(id)) return *s;
  if (const auto* c = find_chiller(id)) return *c;
  if (const auto* t = find_tower(id)) return *t;
  return std::nullopt;
}

std::vector<AssetSpec> AssetLibrary::assets(AssetCategory c) const {
  std::vector<AssetSpec> out;
  auto append = [&out](const auto& v) { out.insert(out.end(), v.begin(), v.end()); };
  switch (c) {
    case AssetCategory::Acu: append(acus_); break;
    case AssetCategory::Rack: append(racks_); break;
    case AssetCategory::Server: append(servers_); break;
    case AssetCategory::Chiller: append(chillers_); break;
    case AssetCategory::CoolingTower: append(towers_); break;
  }
  return out;
}

std::size_t AssetLibrary::count(AssetCategory c) const {
  switch (c) {
    case AssetCategory::Acu: return acus_.size();
    case AssetCategory::Rack: return racks_.size();
    case AssetCategory::Server: return servers_.size();
    case AssetCategory::Chiller: return chillers_.size();
    case AssetCategory::CoolingTower: return towers_.size();
  }
  return 0;
}

std::size_t AssetLibrary::size() const {
  return acus_.size() + racks_.size() + servers_.size() + chillers_.size() + towers_.size();
}

bool AssetLibrary::usable() const {
  return std::all_of(std::begin(kAllCategories), std::end(kAllCategories),
                     [this](AssetCategory c) { return count(c) > 0; });
}

// ---------------------------------------------------------------------------
// JSON

namespace {

class FieldReader {
 public:
  FieldReader(const std::string& id, const json& obj) : id_(id), obj_(obj) {
    if (!obj.is_object()) invalid(id, "asset entry must be a JSON object");
  }

  double number(const char* key) {
    used_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) invalid(id_, std::string("missing field ") + key);
    if (!it->is_number()) invalid(id_, std::string(key) + " must be a number");
    return it->get<double>();
  }

  double number_or(const char* key, double fallback) {
    return obj_.contains(key) ? number(key) : (used_.insert(key), fallback);
  }

  std::string text(const char* key) {
    used_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) invalid(id_, std::string("missing field ") + key);
    if (!it->is_string()) invalid(id_, std::string(key) + " must be a string");
    return it->get<std::string>();
  }

  Vec3 size_or(Vec3 fallback) {
    used_.insert("size");
    auto it = obj_.find("size");
    if (it == obj_.end()) return fallback;
    if (!it->is_object()) invalid(id_, "size must be an object {x, y, z}");
    Vec3 v;
    for (auto [key, dst] : {std::pair{"x", &v.x}, std::pair{"y", &v.y}, std::pair{"z", &v.z}}) {
      auto c = it->find(key);
      if (c == it->end() || !c->is_number()) invalid(id_, std::string("size.") + key + " must be a number");
      *dst = c->get<double>();
    }
    return v;
  }

  void reject_unknown() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!used_.contains(key)) invalid(id_, "unknown field '" + key + "'");
    }
  }

 private:
  const std::string& id_;
  const json& obj_;
  std::set<std::string, std::less<>> used_;
};

AssetSpec parse_asset(AssetCategory c, const std::string& id, const json& obj) {
  FieldReader f(id, obj);
  AssetSpec out;
  switch (c) {
    case AssetCategory::Acu: {
      AcuSpec a;
      a.id = id;
      a.cooling_capacity_kw = f.number("coolingCapacity");
      a.cooling_type = f.text("coolingType");
      a.pressure_rise_pa = f.number("pressureRise");
      a.design_water_flow_m3s = f.number("designWaterFlowRate");
      a.design_air_flow_m3s = f.number("designAirFlowRate");
      a.maximum_flow_m3s = f.number("maximumFlowRate");
      a.design_inlet_water_c = f.number("designInletWaterTemperature");
      a.design_outlet_water_c = f.number("designOutletWaterTemperature");
      a.design_inlet_air_c = f.number("designInletAirTemperature");
      a.design_outlet_air_c = f.number("designOutletAirTemperature");
      a.design_water_delta_k = f.number("designWaterTemperatureDifference");
      a.size = f.size_or(a.size);
      out = a;
      break;
    }
    case AssetCategory::Rack: {
      RackSpec r;
      r.id = id;
      r.power_capacity_kw = f.number("powerCapacity");
      const double slots = f.number("serverSlots");
      if (slots != std::floor(slots)) invalid(id, "serverSlots must be an integer");
      r.server_slots = static_cast<int>(slots);
      r.size = f.size_or(r.size);
      out = r;
      break;
    }
    case AssetCategory::Server: {
      ServerSpec s;
      s.id = id;
      s.idle_power_kw = f.number("idlePower");
      s.peak_power_kw = f.number("peakPower");
      s.computing_capacity_flops = f.number("computingCapacity");
      s.heat_factor = f.number("heatFactor");
      out = s;
      break;
    }
    case AssetCategory::Chiller: {
      ChillerSpec ch;
      ch.id = id;
      ch.rated_capacity_kw = f.number("ratedCapacity");
      ch.carnot_fraction = f.number("carnotFraction");
      ch.chw_supply_setpoint_c = f.number("chwSupplySetpoint");
      ch.rated_pump_fraction = f.number_or("ratedPumpFraction", 0.02);
      ch.size = f.size_or(ch.size);
      out = ch;
      break;
    }
    case AssetCategory::CoolingTower: {
      TowerSpec t;
      t.id = id;
      t.rated_heat_rejection_kw = f.number("ratedHeatRejection");
      t.rated_fan_power_kw = f.number("ratedFanPower");
      t.approach_k = f.number("approach");
      t.size = f.size_or(t.size);
      out = t;
      break;
    }
  }
  f.reject_unknown();
  validate(out);
  return out;
}

json size_json(const Vec3& v) { return json{{"x", v.x}, {"y", v.y}, {"z", v.z}}; }

}  // namespace

json asset_to_json(const AssetSpec& asset) {
  struct Visitor {
    json operator()(const AcuSpec& a) const {
      return {{"coolingCapacity", a.cooling_capacity_kw},
              {"coolingType", a.cooling_type},
              {"pressureRise", a.pressure_rise_pa},
              {"designWaterFlowRate", a.design_water_flow_m3s},
              {"designAirFlowRate", a.design_air_flow_m3s},
              {"maximumFlowRate", a.maximum_flow_m3s},
              {"designInletWaterTemperature", a.design_inlet_water_c},
              {"designOutletWaterTemperature", a.design_outlet_water_c},
              {"designInletAirTemperature", a.design_inlet_air_c},
              {"designOutletAirTemperature", a.design_outlet_air_c},
              {"designWaterTemperatureDifference", a.design_water_delta_k},
              {"size", size_json(a.size)}};
    }
    json operator()(const RackSpec& r) const {
      return {{"powerCapacity", r.power_capacity_kw},
              {"serverSlots", r.server_slots},
              {"size", size_json(r.size)}};
    }
    json operator()(const ServerSpec& s) const {
      return {{"idlePower", s.idle_power_kw},
              {"peakPower", s.peak_power_kw},
              {"computingCapacity", s.computing_capacity_flops},
              {"heatFactor", s.heat_factor}};
    }
    json operator()(const ChillerSpec& c) const {
      return {{"ratedCapacity", c.rated_capacity_kw},
              {"carnotFraction", c.carnot_fraction},
              {"chwSupplySetpoint", c.chw_supply_setpoint_c},
              {"ratedPumpFraction", c.rated_pump_fraction},
              {"size", size_json(c.size)}};
    }
    json operator()(const TowerSpec& t) const {
      return {{"ratedHeatRejection", t.rated_heat_rejection_kw},
              {"ratedFanPower", t.rated_fan_power_kw},
              {"approach", t.approach_k},
              {"size", size_json(t.size)}};
    }
  };
  return std::visit(Visitor{}, asset);
}

AssetLibrary library_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "asset library must be a JSON object");
  std::vector<AssetSpec> assets;
  for (const auto& [section, entries] : doc.items()) {
    auto category = category_from_section(section);
    if (!category) {
      throw Error(ErrorKind::Validation, "unknown asset library section '" + section + "'");
    }
    if (!entries.is_object()) {
      throw Error(ErrorKind::Validation, "section '" + section + "' must be an object keyed by id");
    }
    for (const auto& [id, body] : entries.items()) {
      assets.push_back(parse_asset(*category, id, body));
    }
  }
  return AssetLibrary(std::move(assets));
}

json library_to_json(const AssetLibrary& library) {
  json doc = json::object();
  for (AssetCategory c : kAllCategories) {
    if (library.count(c) == 0) continue;
    json section = json::object();
    for (const auto& asset : library.assets(c)) section[id_of(asset)] = asset_to_json(asset);
    doc[std::string(section_name(c))] = std::move(section);
  }
  return doc;
}

AssetLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open asset library '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "malformed asset library JSON: " + std::string(e.what()));
  }
  return library_from_json(doc);
}

void save_library(const AssetLibrary& library, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write asset library '" + path.string() + "'");
  out << library_to_json(library).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic library

namespace {

std::string numbered_id(std::string_view prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix << '_';
  os.width(2);
  os.fill('0');
  os << (i + 1);
  return os.str();
}

constexpr double kAirDensity = 1.2;
constexpr double kAirCp = 1005.0;
constexpr double kWaterCp = 4186.0;

}  // namespace

AssetLibrary generate_synthetic_library(std::size_t n_per_type, std::uint64_t seed) {
  if (n_per_type < 1) throw Error(ErrorKind::Validation, "n_per_type must be >= 1");
  std::vector<AssetSpec> assets;
  assets.reserve(5 * n_per_type);

  Rng acu_rng(derive_seed(seed, {1}));
  for (std::size_t i = 0; i < n_per_type; ++i) {
    AcuSpec a;
    a.id = numbered_id("ACU", i);
    a.cooling_capacity_kw = acu_rng.uniform(50.0, 500.0);
    a.cooling_type = acu_rng.coin() ? "CW" : "DX";
    const double air_dt = acu_rng.uniform(8.0, 14.0);
    a.design_air_flow_m3s = a.cooling_capacity_kw * 1000.0 / (kAirDensity * kAirCp * air_dt);
    a.maximum_flow_m3s = a.design_air_flow_m3s * acu_rng.uniform(1.0, 1.3);
    a.pressure_rise_pa = acu_rng.uniform(250.0, 800.0);
    a.design_water_delta_k = acu_rng.uniform(5.0, 10.0);
    a.design_water_flow_m3s = a.cooling_capacity_kw / (kWaterCp * a.design_water_delta_k);
    a.design_inlet_water_c = acu_rng.uniform(7.0, 18.0);
    a.design_outlet_water_c = a.design_inlet_water_c + a.design_water_delta_k;
    a.design_inlet_air_c = acu_rng.uniform(30.0, 40.0);
    a.design_outlet_air_c = acu_rng.uniform(18.0, 27.0);
    a.size = {acu_rng.uniform(0.9, 2.5), acu_rng.uniform(0.8, 2.3), 2.0};
    assets.emplace_back(std::move(a));
  }

  Rng rack_rng(derive_seed(seed, {2}));
  for (std::size_t i = 0; i < n_per_type; ++i) {
    RackSpec r;
    r.id = numbered_id("RACK", i);
    r.power_capacity_kw = rack_rng.uniform(4.0, 12.0);
    r.server_slots = static_cast<int>(rack_rng.integer(8, 48));
    r.size = {rack_rng.coin() ? 0.6 : 0.8, 1.2, 2.0};
    assets.emplace_back(std::move(r));
  }

  Rng server_rng(derive_seed(seed, {3}));
  for (std::size_t i = 0; i < n_per_type; ++i) {
    ServerSpec s;
    s.id = numbered_id("SRV", i);
    s.idle_power_kw = server_rng.uniform(0.05, 0.15);
    s.peak_power_kw = server_rng.uniform(s.idle_power_kw + 0.05, 0.45);
    s.computing_capacity_flops = server_rng.uniform(1e12, 1e14);
    s.heat_factor = server_rng.uniform(0.9, 1.0);
    assets.emplace_back(std::move(s));
  }

  Rng chiller_rng(derive_seed(seed, {4}));
  for (std::size_t i = 0; i < n_per_type; ++i) {
    ChillerSpec c;
    c.id = numbered_id("CH", i);
    c.rated_capacity_kw = chiller_rng.uniform(100.0, 2500.0);
    c.carnot_fraction = chiller_rng.uniform(0.35, 0.65);
    c.chw_supply_setpoint_c = chiller_rng.uniform(6.0, 14.0);
    c.rated_pump_fraction = chiller_rng.uniform(0.01, 0.04);
    assets.emplace_back(std::move(c));
  }

  Rng tower_rng(derive_seed(seed, {5}));
  for (std::size_t i = 0; i < n_per_type; ++i) {
    TowerSpec t;
    t.id = numbered_id("CT", i);
    t.rated_heat_rejection_kw = tower_rng.uniform(150.0, 3000.0);
    t.rated_fan_power_kw = t.rated_heat_rejection_kw * tower_rng.uniform(0.008, 0.025);
    t.approach_k = tower_rng.uniform(2.5, 6.0);
    assets.emplace_back(std::move(t));
  }

  AssetLibrary library(std::move(assets));

  // Smoke test: with 8 servers per rack every rack/server pairing must be
  // power-feasible, so a feasible design exists at every scale.
  double worst_rack = 1e300;
  double worst_server = 0.0;
  for (const auto& r : library.racks()) worst_rack = std::min(worst_rack, r.power_capacity_kw);
  for (const auto& s : library.servers()) worst_server = std::max(worst_server, s.peak_power_kw);
  if (8.0 * worst_server > worst_rack) {
    throw std::logic_error("synthetic library ranges admit a power-infeasible rack/server pair");
  }
  return library;
}

}  // namespace dcsynth
