#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcsynth/generation.hpp"
#include "dcsynth/physics.hpp"
#include "dcsynth/scene.hpp"

namespace dcsynth {

class ChatClient;

inline constexpr std::size_t kContextPoints = 64;

// Uniform-stride sample of [0, n) keeping both endpoints; all of it when
// n <= max_points.
std::vector<std::size_t> downsample_indices(std::size_t n, std::size_t max_points = kContextPoints);

// (P_ts, P_fe, P_om) for one simulated candidate.
struct TrajectoryContext {
  std::vector<std::string> rooms;
  std::vector<std::size_t> steps;                   // sampled step indices
  std::vector<std::vector<double>> t_return_c;      // [room][sample]
  std::vector<double> it_kw;                        // [sample]
  std::vector<double> cooling_kw;
  std::vector<double> pue_step;
  std::vector<FailureEvent> failures;               // full resolution, verbatim

  std::optional<double> mean_pue;
  double peak_t_return_c = 0.0;
  std::string peak_room;
  double mean_it_kw = 0.0;
  double mean_fans_kw = 0.0;
  double mean_chillers_kw = 0.0;
  double mean_towers_kw = 0.0;
  double mean_pumps_kw = 0.0;
  // from the constraint checker, when supplied
  bool constraints_ok = true;
  double min_power_slack_kw = 0.0;
  std::map<std::string, double> cooling_slack_kw;
  std::map<std::string, double> room_heat_kw;  // rated, from the scene
  std::vector<std::string> violated;            // constraint ids
};

TrajectoryContext contextualize(const SimulationResult& result, const ConstraintReport* report = nullptr,
                                const Scene* scene = nullptr);

// The {trajectories} text.
std::string render_trajectories(const TrajectoryContext& context);

std::string build_reflect_prompt(const TrajectoryContext& context, const std::string& design,
                                 const std::string& requirements);

struct ReflectionOutput {
  std::string summary;
  std::string suggestions;
  std::string provenance;  // "rulebased", "llm", "rulebased (llm fallback: ...)", "none"
  double pue = 0.0;

  std::string text() const;
};

// Frozen rule table:
//   overheating events                -> increase ACU count (rooms with events)
//   cooling slack < 0                 -> increase ACU count (that room)
//   cooling slack > 50 % of capacity  -> decrease ACU count, when no overheating
//   chiller overload events           -> increase chiller count
//   aisle / clearance violation       -> increase aisle_gap
//   power violation / too few servers -> increase rack count
//   PUE above target                  -> efficiency directive for the largest
//                                        cooling consumer (ACU fans: efficient
//                                        ACU, chillers: efficient chiller,
//                                        towers: more towers)
//   nothing triggered                 -> keep the current design
ReflectionOutput reflect_rulebased(const TrajectoryContext& context, const Requirements& req);

// Sends the reflect prompt; endpoint errors degrade to the rule-based output.
ReflectionOutput reflect_llm(const TrajectoryContext& context, const Requirements& req,
                             const std::string& design, const ChatClient& client);

}  // namespace dcsynth
