#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcsynth/assets.hpp"
#include "dcsynth/scene.hpp"
#include "dcsynth/weather.hpp"
#include "json.hpp"

namespace dcsynth {

enum class Scale { SmallEdge, MediumCluster, LargeCloud };

inline constexpr Scale kAllScales[] = {Scale::SmallEdge, Scale::MediumCluster, Scale::LargeCloud};

std::string_view to_string(Scale s);
std::optional<Scale> scale_from_string(std::string_view s);

// Design requirements. `text` is the free-text brief handed to the design
// prompt; the structured fields drive the offline generators.
struct Requirements {
  std::string text;
  int servers_min = 50;
  int servers_max = 100;
  int servers_per_rack = 8;
  std::string server_model;  // empty: the library's first server
  double max_zone_temp_c = 30.0;
  double target_pue = 1.3;
  int racks_per_room_max = 400;
  int min_rooms = 1;

  void validate() const;
};

// Server bands: small-edge 50-100, medium-cluster 1000-2000, large-cloud
// 10000-12000.
Requirements requirements_for_scale(Scale s);

Requirements requirements_from_json(const nlohmann::json& j);
nlohmann::json requirements_to_json(const Requirements& r);
Requirements load_requirements(const std::filesystem::path& path);

// Free text for the {requirements} slot.
std::string requirements_text(const Requirements& r);

// One ranked history triplet: serialized design, trajectory summary and the
// reflection text.
struct HistoryEntry {
  std::string design;
  std::string trajectory;
  std::string reflection;
  double pue = 0.0;
};

struct DesignQuery {
  std::string assets_lib;
  std::string external_inputs;
  std::string requirements;
  std::vector<HistoryEntry> history;  // rank order, best first
};

std::string assets_context(const AssetLibrary& library);
std::string external_context(const WeatherSummary& summary);
std::string render_history(std::span<const HistoryEntry> history);
std::string build_design_prompt(const DesignQuery& query);

enum class GeneratorKind { Llm, Heuristic, Random, Ea };

std::string_view to_string(GeneratorKind k);
std::optional<GeneratorKind> generator_from_string(std::string_view s);

struct Provenance {
  GeneratorKind kind = GeneratorKind::Heuristic;
  std::uint64_t seed = 0;
  std::string raw_text;  // LLM response, verbatim
  std::string note;      // e.g. the applied mutation
};

struct Candidate {
  bool parse_ok = false;
  std::optional<SceneTopology> topology;
  std::optional<SpatialLayout> layout;
  Provenance provenance;
  std::string parse_error;
};

// First <topology>...</topology> and <layout>...</layout> blocks, parsed
// strictly. Trailing commas before a closing brace are tolerated. Layout rooms
// must match topology rooms. Never throws.
Candidate parse_candidate(std::string_view text);

// Inverse of parse_candidate on valid pairs.
std::string serialize_design(const SceneTopology& topology, const SpatialLayout& layout);

// Server-count requirement: at least servers_min hosted, and no more racks
// than the rack grid (multiples of 4, >= 16 per room) needs for servers_max.
// Ids: requirements.servers, requirements.racks.
std::vector<Violation> check_requirements(const Scene& scene, const Requirements& req);

// Phrases the rule-based reflection writes and the heuristic generator acts
// on when refining a parent design.
namespace directive {
inline constexpr std::string_view kMoreAcus = "increase ACU count";
inline constexpr std::string_view kFewerAcus = "decrease ACU count";
inline constexpr std::string_view kEfficientAcu = "select a more efficient ACU model";
inline constexpr std::string_view kWiderAisle = "increase aisle_gap";
inline constexpr std::string_view kMoreChillers = "increase chiller count";
inline constexpr std::string_view kEfficientChiller = "select a more efficient chiller model";
inline constexpr std::string_view kMoreTowers = "increase cooling tower count";
inline constexpr std::string_view kMoreRacks = "increase rack count";
inline constexpr std::string_view kKeep = "keep the current design";
}  // namespace directive

// Gap sampling ranges of the heuristic generator (meters).
struct GapRanges {
  double aisle_lo = 1.2, aisle_hi = 2.0;
  double margin_lo = 0.5, margin_hi = 1.5;
  double padding_lo = 0.3, padding_hi = 1.0;
  double rack_gap_lo = 0.0, rack_gap_hi = 0.2;
  double acu_gap_lo = 0.3, acu_gap_hi = 1.0;
};

// Feasibility-aware generator. Without history it sizes racks from the
// server band (ceil(servers / per rack), multiple of 4, >= 16 per room), picks
// the smallest even ACU count covering rated heat and sizes the plant with
// 10 % (chillers) and 25 % (towers) headroom. With history it refines the
// ranked parents, following directives found in their reflections.
// Throws Error(InfeasibleRequirement) when no ACU/rack/chiller/tower choice
// can carry the load.
std::vector<Candidate> heuristic_generate(const Requirements& req, const AssetLibrary& library,
                                          std::uint64_t seed, int n,
                                          std::span<const HistoryEntry> history = {},
                                          const GapRanges& gaps = {});

struct RandomOptions {
  int rooms_max = 1;
  int racks_max = 40;   // per room
  int acus_max = 8;     // per room
  int chillers_max = 3;
  int towers_max = 3;
  double gap_max = 2.0;
};

// Ranges scaled to the requirement's band: up to twice the needed racks and
// ACUs per room.
RandomOptions random_options_for(const Requirements& req, const AssetLibrary& library);

// Uniform counts, models and gaps; no feasibility logic.
std::vector<Candidate> random_generate(const AssetLibrary& library, std::uint64_t seed, int n,
                                       const RandomOptions& options = {});

// Changes exactly one gene: a model choice, a count (ACUs by 2 and racks by
// 4, snapped to those multiples) or one layout gap.
Candidate ea_mutate(const Candidate& parent, const AssetLibrary& library, std::uint64_t seed);

}  // namespace dcsynth
