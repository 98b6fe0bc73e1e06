#include "dcsynth/generation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <type_traits>

#include "dcsynth/error.hpp"
#include "dcsynth/prompts.hpp"
#include "dcsynth/random.hpp"

namespace dcsynth {

using nlohmann::json;

namespace {

constexpr int kMaxAcusPerRoom = 64;
constexpr int kMinRacksPerRoom = 16;
constexpr double kChillerHeadroom = 1.1;
constexpr double kTowerHeadroom = 1.25;

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

std::string room_name(int i) { return "hall_" + std::to_string(i + 1); }

}  // namespace

std::string_view to_string(Scale s) {
  switch (s) {
    case Scale::SmallEdge: return "small-edge";
    case Scale::MediumCluster: return "medium-cluster";
    case Scale::LargeCloud: return "large-cloud";
  }
  return "unknown";
}

std::optional<Scale> scale_from_string(std::string_view s) {
  for (Scale x : kAllScales) {
    if (to_string(x) == s) return x;
  }
  return std::nullopt;
}

void Requirements::validate() const {
  if (servers_min < 1 || servers_max < servers_min) {
    throw Error(ErrorKind::Config, "requirements: need 1 <= servers_min <= servers_max");
  }
  if (servers_per_rack < 1) throw Error(ErrorKind::Config, "requirements: servers_per_rack must be >= 1");
  if (racks_per_room_max < kMinRacksPerRoom) {
    throw Error(ErrorKind::Config, "requirements: racks_per_room_max must be >= 16");
  }
  if (min_rooms < 1) throw Error(ErrorKind::Config, "requirements: min_rooms must be >= 1");
  if (!(target_pue >= 1.0)) throw Error(ErrorKind::Config, "requirements: target_pue must be >= 1");
}

Requirements requirements_for_scale(Scale s) {
  Requirements r;
  switch (s) {
    case Scale::SmallEdge:
      r.servers_min = 50;
      r.servers_max = 100;
      break;
    case Scale::MediumCluster:
      r.servers_min = 1000;
      r.servers_max = 2000;
      break;
    case Scale::LargeCloud:
      r.servers_min = 10000;
      r.servers_max = 12000;
      break;
  }
  r.text = "Help me design an energy efficient " + std::string(to_string(s)) + " data center with " +
           std::to_string(r.servers_min) + "-" + std::to_string(r.servers_max) +
           " servers. Please add enough cooling facilities to keep each zone temperature under 30.";
  return r;
}

Requirements requirements_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "requirements must be a JSON object");
  static const std::vector<std::string> kKeys = {"text",           "scale",          "servers_min",
                                                 "servers_max",    "servers_per_rack", "server_model",
                                                 "max_zone_temp_c", "target_pue",    "racks_per_room_max",
                                                 "min_rooms"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw Error(ErrorKind::Parse, "unknown requirements key '" + key + "'");
    }
  }
  Requirements r;
  try {
    if (j.contains("scale")) {
      const auto s = scale_from_string(j.at("scale").get<std::string>());
      if (!s) throw Error(ErrorKind::Parse, "unknown scale '" + j.at("scale").get<std::string>() + "'");
      r = requirements_for_scale(*s);
    }
    r.text = j.value("text", r.text);
    r.servers_min = j.value("servers_min", r.servers_min);
    r.servers_max = j.value("servers_max", r.servers_max);
    r.servers_per_rack = j.value("servers_per_rack", r.servers_per_rack);
    r.server_model = j.value("server_model", r.server_model);
    r.max_zone_temp_c = j.value("max_zone_temp_c", r.max_zone_temp_c);
    r.target_pue = j.value("target_pue", r.target_pue);
    r.racks_per_room_max = j.value("racks_per_room_max", r.racks_per_room_max);
    r.min_rooms = j.value("min_rooms", r.min_rooms);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("requirements: ") + e.what());
  }
  r.validate();
  return r;
}

json requirements_to_json(const Requirements& r) {
  return {{"text", r.text},
          {"servers_min", r.servers_min},
          {"servers_max", r.servers_max},
          {"servers_per_rack", r.servers_per_rack},
          {"server_model", r.server_model},
          {"max_zone_temp_c", r.max_zone_temp_c},
          {"target_pue", r.target_pue},
          {"racks_per_room_max", r.racks_per_room_max},
          {"min_rooms", r.min_rooms}};
}

Requirements load_requirements(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open requirements file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "requirements file '" + path.string() + "': " + e.what());
  }
  return requirements_from_json(j);
}

std::string requirements_text(const Requirements& r) {
  std::ostringstream out;
  if (!r.text.empty()) out << r.text << '\n';
  out << "- Servers: " << r.servers_min << "-" << r.servers_max << ", " << r.servers_per_rack
      << " per rack\n"
      << "- Keep each zone temperature under " << r.max_zone_temp_c << "\n"
      << "- Target PUE: " << r.target_pue << "\n"
      << "- At most " << r.racks_per_room_max << " racks per room, at least " << r.min_rooms << " room(s)";
  return out.str();
}

// ---------------------------------------------------------------------------
// Prompt

std::string assets_context(const AssetLibrary& library) { return library_to_json(library).dump(4); }

std::string external_context(const WeatherSummary& s) {
  std::ostringstream out;
  out.precision(4);
  out << "- Hours: " << s.hours << "\n"
      << "- Mean dry-bulb temperature: " << s.mean_dry_bulb_c << " C\n"
      << "- Mean wet-bulb temperature: " << s.mean_wet_bulb_c << " C\n"
      << "- Mean humidity ratio: " << s.mean_humidity_ratio << " kg/kg";
  return out.str();
}

std::string render_history(std::span<const HistoryEntry> history) {
  if (history.empty()) return "none";
  std::ostringstream out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    if (i > 0) out << "\n\n";
    out << "### Rank " << (i + 1) << " (PUE " << h.pue << ")\n"
        << "Design:\n" << h.design << "\n"
        << "Trajectories:\n" << h.trajectory << "\n"
        << "Reflection:\n" << h.reflection;
  }
  return out.str();
}

std::string build_design_prompt(const DesignQuery& q) {
  return render_template(kDesignTemplate, {{"assets_lib", q.assets_lib},
                                           {"external_inputs", q.external_inputs},
                                           {"requirements", q.requirements},
                                           {"history", render_history(q.history)}});
}

std::string_view to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Llm: return "llm";
    case GeneratorKind::Heuristic: return "heuristic";
    case GeneratorKind::Random: return "random";
    case GeneratorKind::Ea: return "ea";
  }
  return "unknown";
}

std::optional<GeneratorKind> generator_from_string(std::string_view s) {
  for (auto k : {GeneratorKind::Llm, GeneratorKind::Heuristic, GeneratorKind::Random, GeneratorKind::Ea}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

// Drops commas directly after '{' / '[' or directly before '}' / ']',
// outside strings.
std::string relax_commas(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  bool escaped = false;
  auto last_significant = [&out]() -> char {
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
      if (!std::isspace(static_cast<unsigned char>(*it))) return *it;
    }
    return '\0';
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      out += c;
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      continue;
    }
    if (c == ',') {
      const char prev = last_significant();
      if (prev == '{' || prev == '[' || prev == ',') continue;
      std::size_t j = i + 1;
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;
    }
    out += c;
  }
  return out;
}

std::optional<std::string_view> tagged_block(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto a = text.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = text.find(close, a + open.size());
  if (b == std::string_view::npos) return std::nullopt;
  return text.substr(a + open.size(), b - a - open.size());
}

}  // namespace

Candidate parse_candidate(std::string_view text) {
  Candidate c;
  c.provenance.raw_text = std::string(text);
  const auto topo = tagged_block(text, "topology");
  const auto layout = tagged_block(text, "layout");
  if (!topo) {
    c.parse_error = "missing <topology> block";
    return c;
  }
  if (!layout) {
    c.parse_error = "missing <layout> block";
    return c;
  }
  try {
    SceneTopology t = topology_from_json(json::parse(relax_commas(*topo)));
    SpatialLayout l = layout_from_json(json::parse(relax_commas(*layout)));
    if (t.rooms.empty()) throw Error(ErrorKind::Parse, "topology has no rooms");
    for (const auto& [name, _] : t.rooms) {
      if (!l.rooms.count(name)) throw Error(ErrorKind::Parse, "layout missing room '" + name + "'");
    }
    for (const auto& [name, _] : l.rooms) {
      if (!t.rooms.count(name)) throw Error(ErrorKind::Parse, "layout names unknown room '" + name + "'");
    }
    c.topology = std::move(t);
    c.layout = std::move(l);
    c.parse_ok = true;
  } catch (const json::exception& e) {
    c.parse_error = e.what();
  } catch (const Error& e) {
    c.parse_error = e.what();
  }
  return c;
}

std::string serialize_design(const SceneTopology& topology, const SpatialLayout& layout) {
  return "<topology>\n" + topology_to_json(topology).dump(4) + "\n</topology>\n<layout>\n" +
         layout_to_json(layout).dump(4) + "\n</layout>";
}

// ---------------------------------------------------------------------------
// Heuristic generator

namespace {

struct Sizing {
  const ServerSpec* server = nullptr;
  std::vector<const RackSpec*> racks;      // models able to host servers_per_rack
  std::vector<const AcuSpec*> acus;        // by specific fan power, best first
  std::vector<const ChillerSpec*> chillers;  // by carnot fraction, best first
  std::vector<const TowerSpec*> towers;    // by fan power per kW, best first
  double heat_per_rack = 0.0;
};

double acu_specific_fan(const AcuSpec& a) {
  return a.design_air_flow_m3s * a.pressure_rise_pa / a.cooling_capacity_kw;
}

const ServerSpec& pick_server(const Requirements& req, const AssetLibrary& library) {
  if (!req.server_model.empty()) {
    const ServerSpec* s = library.find_server(req.server_model);
    if (!s) throw Error(ErrorKind::UnknownModel, "unknown server model '" + req.server_model + "'");
    return *s;
  }
  if (library.servers().empty()) throw Error(ErrorKind::EmptyCategory, "library has no servers");
  return library.servers().front();
}

Sizing make_sizing(const Requirements& req, const AssetLibrary& library) {
  Sizing s;
  s.server = &pick_server(req, library);
  const double rack_power = req.servers_per_rack * s.server->peak_power_kw;
  for (const auto& r : library.racks()) {
    if (r.power_capacity_kw >= rack_power && r.server_slots >= req.servers_per_rack) s.racks.push_back(&r);
  }
  if (s.racks.empty()) {
    throw Error(ErrorKind::InfeasibleRequirement,
                "no rack model can host " + std::to_string(req.servers_per_rack) + " servers of '" +
                    s.server->id + "'");
  }
  for (const auto& a : library.acus()) s.acus.push_back(&a);
  std::stable_sort(s.acus.begin(), s.acus.end(),
                   [](auto* a, auto* b) { return acu_specific_fan(*a) < acu_specific_fan(*b); });
  for (const auto& c : library.chillers()) s.chillers.push_back(&c);
  std::stable_sort(s.chillers.begin(), s.chillers.end(),
                   [](auto* a, auto* b) { return a->carnot_fraction > b->carnot_fraction; });
  for (const auto& t : library.towers()) s.towers.push_back(&t);
  std::stable_sort(s.towers.begin(), s.towers.end(), [](auto* a, auto* b) {
    return a->rated_fan_power_kw / a->rated_heat_rejection_kw < b->rated_fan_power_kw / b->rated_heat_rejection_kw;
  });
  if (s.acus.empty() || s.chillers.empty() || s.towers.empty()) {
    throw Error(ErrorKind::EmptyCategory, "library lacks ACU, chiller or cooling tower models");
  }
  s.heat_per_rack = rack_power * s.server->heat_factor;
  return s;
}

// Smallest even count >= 2 covering `heat`; 0 when above the per-room cap.
int acu_count_for(double heat, const AcuSpec& a) {
  int n = std::max(2, static_cast<int>(std::ceil(heat / a.cooling_capacity_kw - 1e-9)));
  if (n % 2) ++n;
  return n <= kMaxAcusPerRoom ? n : 0;
}

int plant_count(double load, double unit) { return std::max(1, static_cast<int>(std::ceil(load / unit - 1e-9))); }

// ACU models able to cool `heat` within the per-room cap, by the room's total
// design fan power.
std::vector<const AcuSpec*> feasible_acus(const Sizing& s, double heat) {
  std::vector<const AcuSpec*> out;
  for (auto* a : s.acus) {
    if (acu_count_for(heat, *a) > 0) out.push_back(a);
  }
  auto fan = [&](const AcuSpec* a) { return acu_count_for(heat, *a) * a->design_air_flow_m3s * a->pressure_rise_pa; };
  std::stable_sort(out.begin(), out.end(), [&](auto* a, auto* b) { return fan(a) < fan(b); });
  return out;
}

template <class T>
const T* pick_top(const std::vector<const T*>& ranked, Rng& rng, std::size_t top = 3) {
  return ranked[rng.index(std::min(top, ranked.size()))];
}

RoomLayout sample_gaps(const GapRanges& g, Rng& rng) {
  RoomLayout l;
  l.aisle_gap = rng.uniform(g.aisle_lo, g.aisle_hi);
  l.margin = rng.uniform(g.margin_lo, g.margin_hi);
  l.padding = rng.uniform(g.padding_lo, g.padding_hi);
  l.rack_gap = rng.uniform(g.rack_gap_lo, g.rack_gap_hi);
  l.acu_gap = rng.uniform(g.acu_gap_lo, g.acu_gap_hi);
  return l;
}

int room_racks(const RoomTopology& room) {
  int n = 0;
  for (const auto& [_, c] : room.racks) n += c;
  return n;
}

double total_heat(const SceneTopology& t, const Sizing& s) {
  double racks = 0;
  for (const auto& [_, room] : t.rooms) racks += room_racks(room);
  return racks * s.heat_per_rack;
}

void size_plant(SceneTopology& t, const Sizing& s, const ChillerSpec& chiller, const TowerSpec& tower) {
  const double heat = total_heat(t, s);
  t.chillers = {{chiller.id, plant_count(kChillerHeadroom * heat, chiller.rated_capacity_kw)}};
  t.towers = {{tower.id, plant_count(kTowerHeadroom * heat, tower.rated_heat_rejection_kw)}};
}

void set_room_acus(RoomTopology& room, const AcuSpec& acu, double heat) {
  room.acus = {{acu.id, acu_count_for(heat, acu)}};
}

Candidate fresh_design(const Requirements& req, const Sizing& s, const GapRanges& gaps, Rng& rng) {
  const int servers = static_cast<int>(rng.integer(req.servers_min, req.servers_max));
  int racks = (servers + req.servers_per_rack - 1) / req.servers_per_rack;
  const int rooms = std::max(req.min_rooms, (racks + req.racks_per_room_max - 1) / req.racks_per_room_max);
  const int per_room = std::max(kMinRacksPerRoom, round_up((racks + rooms - 1) / rooms, 4));
  const double heat = per_room * s.heat_per_rack;
  const auto acus = feasible_acus(s, heat);
  if (acus.empty()) {
    throw Error(ErrorKind::InfeasibleRequirement,
                "no ACU model covers " + std::to_string(heat) + " kW with at most " +
                    std::to_string(kMaxAcusPerRoom) + " units per room");
  }
  const RackSpec* rack = s.racks[rng.index(s.racks.size())];
  const AcuSpec* acu = pick_top(acus, rng);

  SceneTopology t;
  SpatialLayout l;
  for (int r = 0; r < rooms; ++r) {
    RoomTopology room;
    room.racks = {{rack->id, per_room}};
    set_room_acus(room, *acu, heat);
    t.rooms.emplace(room_name(r), std::move(room));
    l.rooms.emplace(room_name(r), sample_gaps(gaps, rng));
  }
  size_plant(t, s, *pick_top(s.chillers, rng), *pick_top(s.towers, rng));
  Candidate c;
  c.parse_ok = true;
  c.topology = std::move(t);
  c.layout = std::move(l);
  return c;
}

bool mentions(std::string_view text, std::string_view phrase) { return text.find(phrase) != std::string_view::npos; }

// Room-scoped directives read "<phrase> in <room>"; a bare phrase applies to
// every room.
bool mentions_room(std::string_view text, std::string_view phrase, std::string_view room) {
  for (auto pos = text.find(phrase); pos != std::string_view::npos; pos = text.find(phrase, pos + 1)) {
    std::string_view rest = text.substr(pos + phrase.size());
    if (rest.substr(0, 4) != " in ") return true;
    rest.remove_prefix(4);
    if (rest.substr(0, room.size()) == room &&
        (rest.size() == room.size() || !(std::isalnum(static_cast<unsigned char>(rest[room.size()])) ||
                                          rest[room.size()] == '_'))) {
      return true;
    }
  }
  return false;
}

// Applies reflection directives, then one feasibility-preserving exploration
// move, to a parsed parent design.
Candidate refine_design(const Candidate& parent, std::string_view reflection, const Sizing& s,
                        const GapRanges& gaps, Rng& rng, std::string& note) {
  SceneTopology t = *parent.topology;
  SpatialLayout l = *parent.layout;
  auto current_acu = [&](const RoomTopology& room) -> const AcuSpec* {
    for (auto* a : s.acus) {
      if (room.acus.count(a->id)) return a;
    }
    return nullptr;
  };

  if (mentions(reflection, directive::kMoreRacks)) {
    for (auto& [name, room] : t.rooms) {
      if (!room.racks.empty()) room.racks.begin()->second = round_up(room.racks.begin()->second, 4) + 4;
    }
    note += "racks+4;";
  }
  for (auto& [name, room] : t.rooms) {
    const double heat = room_racks(room) * s.heat_per_rack;
    const AcuSpec* acu = current_acu(room);
    if (!acu) {
      const auto feas = feasible_acus(s, heat);
      if (!feas.empty()) set_room_acus(room, *feas.front(), heat);
      continue;
    }
    if (mentions(reflection, directive::kEfficientAcu)) {
      const auto feas = feasible_acus(s, heat);
      auto it = std::find(feas.begin(), feas.end(), acu);
      if (it != feas.end() && it != feas.begin()) acu = *(it - 1);
      else if (it == feas.end() && !feas.empty()) acu = feas.front();
      set_room_acus(room, *acu, heat);
      note += "acu_model:" + name + ";";
    }
    int& count = room.acus.begin()->second;
    if (mentions_room(reflection, directive::kMoreAcus, name)) {
      count = std::min(kMaxAcusPerRoom, round_up(count, 2) + 2);
      note += "acus+2:" + name + ";";
    } else if (mentions_room(reflection, directive::kFewerAcus, name)) {
      const int floor_count = acu_count_for(heat, *acu);
      if (count - 2 >= std::max(2, floor_count)) count -= 2;
      note += "acus-2:" + name + ";";
    }
    if (mentions(reflection, directive::kWiderAisle)) {
      l.rooms[name].aisle_gap += 0.2;
      note += "aisle+0.2:" + name + ";";
    }
  }
  auto plant_model = [&](auto& counts, const auto& ranked) {
    using Ptr = std::remove_cvref_t<decltype(ranked.front())>;
    for (Ptr p : ranked) {
      if (counts.count(p->id)) return p;
    }
    return ranked.front();
  };
  const ChillerSpec* chiller = plant_model(t.chillers, s.chillers);
  const TowerSpec* tower = plant_model(t.towers, s.towers);
  if (mentions(reflection, directive::kEfficientChiller)) {
    auto it = std::find(s.chillers.begin(), s.chillers.end(), chiller);
    if (it != s.chillers.begin()) chiller = *(it - 1);
    note += "chiller_model;";
  }
  size_plant(t, s, *chiller, *tower);
  if (mentions(reflection, directive::kMoreChillers)) {
    t.chillers.begin()->second += 1;
    note += "chillers+1;";
  }
  if (mentions(reflection, directive::kMoreTowers)) {
    t.towers.begin()->second += 1;
    note += "towers+1;";
  }

  // exploration
  switch (rng.index(4)) {
    case 0: {
      for (auto& [name, room] : t.rooms) {
        const double heat = room_racks(room) * s.heat_per_rack;
        const auto feas = feasible_acus(s, heat);
        if (!feas.empty()) set_room_acus(room, *pick_top(feas, rng), heat);
      }
      note += "explore:acu_model";
      break;
    }
    case 1:
      size_plant(t, s, *pick_top(s.chillers, rng), *tower);
      note += "explore:chiller_model";
      break;
    case 2:
      size_plant(t, s, *chiller, *pick_top(s.towers, rng));
      note += "explore:tower_model";
      break;
    default: {
      auto it = l.rooms.begin();
      std::advance(it, static_cast<long>(rng.index(l.rooms.size())));
      const double aisle = it->second.aisle_gap;
      it->second = sample_gaps(gaps, rng);
      it->second.aisle_gap = std::max(aisle, it->second.aisle_gap);
      note += "explore:gaps:" + it->first;
      break;
    }
  }
  Candidate c;
  c.parse_ok = true;
  c.topology = std::move(t);
  c.layout = std::move(l);
  return c;
}

}  // namespace

std::vector<Violation> check_requirements(const Scene& scene, const Requirements& req) {
  std::vector<Violation> out;
  const int rooms = static_cast<int>(scene.topology.rooms.size());
  int racks = 0;
  for (const auto& [_, room] : scene.topology.rooms) {
    for (const auto& [__, n] : room.racks) racks += n;
  }
  const int servers = racks * scene.servers_per_rack;
  if (servers < req.servers_min) {
    out.push_back({"requirements.servers",
                   std::to_string(servers) + " servers hosted, " + std::to_string(req.servers_min) + " required",
                   static_cast<double>(servers - req.servers_min)});
  }
  if (rooms > 0) {
    const int needed = (req.servers_max + req.servers_per_rack - 1) / req.servers_per_rack;
    const int per_room = std::max(kMinRacksPerRoom, round_up((needed + rooms - 1) / rooms, 4));
    const int limit = per_room * rooms;
    if (racks > limit) {
      out.push_back({"requirements.racks",
                     std::to_string(racks) + " racks exceed the " + std::to_string(limit) +
                         " needed for " + std::to_string(req.servers_max) + " servers",
                     static_cast<double>(limit - racks)});
    }
  }
  return out;
}

std::vector<Candidate> heuristic_generate(const Requirements& req, const AssetLibrary& library,
                                          std::uint64_t seed, int n, std::span<const HistoryEntry> history,
                                          const GapRanges& gaps) {
  req.validate();
  const Sizing s = make_sizing(req, library);
  std::vector<Candidate> parents;
  std::vector<std::string_view> reflections;
  for (const auto& h : history) {
    Candidate p = parse_candidate(h.design);
    if (p.parse_ok) {
      parents.push_back(std::move(p));
      reflections.push_back(h.reflection);
    }
  }
  std::vector<Candidate> out;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t sub = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    Rng rng(sub);
    Candidate c;
    std::string note;
    if (!parents.empty()) {
      const std::size_t k = static_cast<std::size_t>(i) % parents.size();
      c = refine_design(parents[k], reflections[k], s, gaps, rng, note);
      note = "parent " + std::to_string(k + 1) + ": " + note;
    } else {
      c = fresh_design(req, s, gaps, rng);
    }
    c.provenance = {GeneratorKind::Heuristic, sub, serialize_design(*c.topology, *c.layout), note};
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random generator and mutation

RandomOptions random_options_for(const Requirements& req, const AssetLibrary& library) {
  req.validate();
  const int racks = std::max(kMinRacksPerRoom, (req.servers_max + req.servers_per_rack - 1) / req.servers_per_rack);
  const int rooms = std::max(req.min_rooms, (racks + req.racks_per_room_max - 1) / req.racks_per_room_max);
  const int per_room = (racks + rooms - 1) / rooms;
  double heat_per_rack = 0.0;
  if (!library.servers().empty()) {
    const ServerSpec& srv = pick_server(req, library);
    heat_per_rack = req.servers_per_rack * srv.peak_power_kw * srv.heat_factor;
  }
  double mean_cap = 0.0;
  for (const auto& a : library.acus()) mean_cap += a.cooling_capacity_kw / static_cast<double>(library.acus().size());
  int acus = 8;
  if (mean_cap > 0.0) acus = std::max(4, static_cast<int>(std::ceil(per_room * heat_per_rack / mean_cap)));
  RandomOptions o;
  o.rooms_max = 2 * rooms;
  o.racks_max = 2 * per_room;
  o.acus_max = 2 * acus;
  o.chillers_max = 3;
  o.towers_max = 3;
  return o;
}

std::vector<Candidate> random_generate(const AssetLibrary& library, std::uint64_t seed, int n,
                                       const RandomOptions& o) {
  if (library.racks().empty() || library.acus().empty() || library.chillers().empty() ||
      library.towers().empty()) {
    throw Error(ErrorKind::EmptyCategory, "random generation needs every asset category");
  }
  std::vector<Candidate> out;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t sub = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    Rng rng(sub);
    SceneTopology t;
    SpatialLayout l;
    const int rooms = static_cast<int>(rng.integer(1, std::max(1, o.rooms_max)));
    for (int r = 0; r < rooms; ++r) {
      RoomTopology room;
      room.racks[library.racks()[rng.index(library.racks().size())].id] =
          static_cast<int>(rng.integer(1, std::max(1, o.racks_max)));
      room.acus[library.acus()[rng.index(library.acus().size())].id] =
          static_cast<int>(rng.integer(1, std::max(1, o.acus_max)));
      t.rooms.emplace(room_name(r), std::move(room));
      RoomLayout g;
      g.aisle_gap = rng.uniform(0.0, o.gap_max);
      g.margin = rng.uniform(0.0, o.gap_max);
      g.padding = rng.uniform(0.0, o.gap_max);
      g.rack_gap = rng.uniform(0.0, o.gap_max);
      g.acu_gap = rng.uniform(0.0, o.gap_max);
      l.rooms.emplace(room_name(r), g);
    }
    t.chillers[library.chillers()[rng.index(library.chillers().size())].id] =
        static_cast<int>(rng.integer(0, o.chillers_max));
    t.towers[library.towers()[rng.index(library.towers().size())].id] =
        static_cast<int>(rng.integer(0, o.towers_max));
    Candidate c;
    c.parse_ok = true;
    c.topology = std::move(t);
    c.layout = std::move(l);
    c.provenance = {GeneratorKind::Random, sub, serialize_design(*c.topology, *c.layout), {}};
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

enum class Gene { AcuModel, AcuCount, RackModel, RackCount, ChillerModel, ChillerCount, TowerModel, TowerCount, Gap };

template <class Spec>
bool swap_model(std::map<std::string, int>& counts, const std::vector<Spec>& models, Rng& rng) {
  if (counts.empty() || models.size() < 2) return false;
  auto it = counts.begin();
  std::advance(it, static_cast<long>(rng.index(counts.size())));
  std::vector<const Spec*> others;
  for (const auto& m : models) {
    if (!counts.count(m.id)) others.push_back(&m);
  }
  if (others.empty()) return false;
  const int n = it->second;
  counts.erase(it);
  counts[others[rng.index(others.size())]->id] = n;
  return true;
}

bool step_count(std::map<std::string, int>& counts, int step, int floor_count, Rng& rng) {
  if (counts.empty()) return false;
  auto it = counts.begin();
  std::advance(it, static_cast<long>(rng.index(counts.size())));
  int& n = it->second;
  int next = rng.coin() ? n + step : n - step;
  next = round_up(std::max(next, 0), step);
  if (next < floor_count) next = n + step;
  next = round_up(next, step);
  if (next == n) next += step;
  n = next;
  return true;
}

}  // namespace

Candidate ea_mutate(const Candidate& parent, const AssetLibrary& library, std::uint64_t seed) {
  if (!parent.parse_ok || !parent.topology || !parent.layout) {
    throw Error(ErrorKind::Validation, "cannot mutate a candidate that failed to parse");
  }
  Rng rng(derive_seed(seed, {0x6561}));
  SceneTopology t = *parent.topology;
  SpatialLayout l = *parent.layout;
  std::string note;
  constexpr Gene kGenes[] = {Gene::AcuModel,     Gene::AcuCount,   Gene::RackModel,
                             Gene::RackCount,    Gene::ChillerModel, Gene::ChillerCount,
                             Gene::TowerModel,   Gene::TowerCount, Gene::Gap};
  static constexpr const char* kFields[] = {"aisle_gap", "margin", "padding", "rack_gap", "acu_gap"};
  for (int attempt = 0; attempt < 64 && note.empty(); ++attempt) {
    const Gene g = kGenes[rng.index(std::size(kGenes))];
    auto room_it = t.rooms.begin();
    std::advance(room_it, static_cast<long>(rng.index(t.rooms.size())));
    RoomTopology& room = room_it->second;
    switch (g) {
      case Gene::AcuModel:
        if (swap_model(room.acus, library.acus(), rng)) note = "acu_model:" + room_it->first;
        break;
      case Gene::AcuCount:
        if (step_count(room.acus, 2, 2, rng)) note = "acu_count:" + room_it->first;
        break;
      case Gene::RackModel:
        if (swap_model(room.racks, library.racks(), rng)) note = "rack_model:" + room_it->first;
        break;
      case Gene::RackCount:
        if (step_count(room.racks, 4, 4, rng)) note = "rack_count:" + room_it->first;
        break;
      case Gene::ChillerModel:
        if (swap_model(t.chillers, library.chillers(), rng)) note = "chiller_model";
        break;
      case Gene::ChillerCount:
        if (step_count(t.chillers, 1, 1, rng)) note = "chiller_count";
        break;
      case Gene::TowerModel:
        if (swap_model(t.towers, library.towers(), rng)) note = "tower_model";
        break;
      case Gene::TowerCount:
        if (step_count(t.towers, 1, 1, rng)) note = "tower_count";
        break;
      case Gene::Gap: {
        RoomLayout& d = l.rooms.at(room_it->first);
        const std::size_t f = rng.index(std::size(kFields));
        double* fields[] = {&d.aisle_gap, &d.margin, &d.padding, &d.rack_gap, &d.acu_gap};
        double delta = rng.uniform(-0.3, 0.3);
        if (std::abs(delta) < 0.01) delta = 0.05;
        double next = std::max(0.0, *fields[f] + delta);
        if (next == *fields[f]) next += 0.05;
        *fields[f] = next;
        note = std::string("gap:") + room_it->first + "." + kFields[f];
        break;
      }
    }
  }
  Candidate c;
  c.parse_ok = true;
  c.topology = std::move(t);
  c.layout = std::move(l);
  c.provenance = {GeneratorKind::Ea, seed, serialize_design(*c.topology, *c.layout), note};
  return c;
}

}  // namespace dcsynth
