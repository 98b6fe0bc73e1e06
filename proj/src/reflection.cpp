#include "dcsynth/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "dcsynth/error.hpp"
#include "dcsynth/llm_client.hpp"
#include "dcsynth/prompts.hpp"

namespace dcsynth {

namespace {

constexpr std::size_t kListedEvents = 20;

std::string num(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::size_t> downsample_indices(std::size_t n, std::size_t max_points) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  if (n <= max_points || max_points < 2) {
    const std::size_t m = n <= max_points ? n : 1;
    for (std::size_t i = 0; i < m; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t i = 0; i < max_points; ++i) {
    out.push_back((i * (n - 1) + (max_points - 1) / 2) / (max_points - 1));
  }
  return out;
}

TrajectoryContext contextualize(const SimulationResult& result, const ConstraintReport* report,
                                const Scene* scene) {
  TrajectoryContext c;
  c.rooms = result.rooms;
  c.steps = downsample_indices(result.steps.size());
  c.t_return_c.assign(result.rooms.size(), {});
  for (std::size_t idx : c.steps) {
    const auto& s = result.steps[idx];
    for (std::size_t r = 0; r < result.rooms.size(); ++r) c.t_return_c[r].push_back(s.t_return_c[r]);
    c.it_kw.push_back(s.power.it);
    c.cooling_kw.push_back(s.power.cooling());
    c.pue_step.push_back(s.pue);
  }
  c.failures = result.failures;
  c.mean_pue = result.mean_pue;
  c.peak_t_return_c = -std::numeric_limits<double>::infinity();
  for (const auto& s : result.steps) {
    for (std::size_t r = 0; r < result.rooms.size(); ++r) {
      if (s.t_return_c[r] > c.peak_t_return_c) {
        c.peak_t_return_c = s.t_return_c[r];
        c.peak_room = result.rooms[r];
      }
    }
    c.mean_it_kw += s.power.it;
    c.mean_fans_kw += s.power.acu_fans;
    c.mean_chillers_kw += s.power.chillers;
    c.mean_towers_kw += s.power.towers;
    c.mean_pumps_kw += s.power.pumps;
  }
  if (!result.steps.empty()) {
    const double n = static_cast<double>(result.steps.size());
    c.mean_it_kw /= n;
    c.mean_fans_kw /= n;
    c.mean_chillers_kw /= n;
    c.mean_towers_kw /= n;
    c.mean_pumps_kw /= n;
  }
  if (!std::isfinite(c.peak_t_return_c)) c.peak_t_return_c = 0.0;
  if (report) {
    c.constraints_ok = report->valid();
    c.min_power_slack_kw = report->min_power_slack_kw;
    c.cooling_slack_kw = report->cooling_slack_kw;
    for (const auto& v : report->violations) c.violated.push_back(v.constraint);
  }
  if (scene) {
    for (const auto& [name, _] : scene->topology.rooms) c.room_heat_kw[name] = room_rated_heat_kw(*scene, name);
  }
  return c;
}

std::string render_trajectories(const TrajectoryContext& c) {
  std::ostringstream out;
  out << "Time series (" << c.steps.size() << " sampled hours):\n";
  out << "hour";
  for (const auto& r : c.rooms) out << ", T_return[" << r << "] C";
  out << ", IT kW, cooling kW, PUE\n";
  for (std::size_t i = 0; i < c.steps.size(); ++i) {
    out << c.steps[i];
    for (std::size_t r = 0; r < c.rooms.size(); ++r) out << ", " << num(c.t_return_c[r][i]);
    out << ", " << num(c.it_kw[i], 6) << ", " << num(c.cooling_kw[i], 6) << ", " << num(c.pue_step[i]) << '\n';
  }

  out << "Failure events:";
  if (c.failures.empty()) {
    out << " none (no overheating events)\n";
  } else {
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    for (const auto& f : c.failures) ++counts[{std::string(to_string(f.kind)), f.room}];
    out << ' ' << c.failures.size() << " total\n";
    for (const auto& [key, n] : counts) {
      out << "- " << key.first << (key.second.empty() ? "" : " in " + key.second) << ": " << n << " steps\n";
    }
    const std::size_t shown = std::min(kListedEvents, c.failures.size());
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& f = c.failures[i];
      out << "  hour " << f.step << ' ' << to_string(f.kind) << (f.room.empty() ? "" : " " + f.room)
          << " magnitude " << num(f.magnitude) << '\n';
    }
    if (shown < c.failures.size()) out << "  ... " << (c.failures.size() - shown) << " more\n";
  }

  out << "Overall metrics:\n";
  out << "- PUE: " << (c.mean_pue ? num(*c.mean_pue, 6) : std::string("unavailable")) << '\n';
  out << "- Peak return air temperature: " << num(c.peak_t_return_c) << " C";
  if (!c.peak_room.empty()) out << " (" << c.peak_room << ")";
  out << '\n';
  out << "- Mean power kW: IT " << num(c.mean_it_kw, 6) << ", ACU fans " << num(c.mean_fans_kw) << ", chillers "
      << num(c.mean_chillers_kw) << ", towers " << num(c.mean_towers_kw) << ", pumps " << num(c.mean_pumps_kw)
      << '\n';
  out << "- Constraints: " << (c.constraints_ok ? "satisfied" : "violated");
  for (const auto& v : c.violated) out << ' ' << v;
  out << '\n';
  for (const auto& [room, slack] : c.cooling_slack_kw) {
    out << "- Cooling slack " << room << ": " << num(slack, 6) << " kW\n";
  }
  out << "- Worst rack power slack: " << num(c.min_power_slack_kw) << " kW";
  return out.str();
}

std::string build_reflect_prompt(const TrajectoryContext& context, const std::string& design,
                                 const std::string& requirements) {
  return render_template(kReflectTemplate, {{"requirements", requirements},
                                            {"trajectories", render_trajectories(context)},
                                            {"design", design}});
}

std::string ReflectionOutput::text() const {
  if (suggestions.empty()) return summary;
  return summary + "\n\n" + suggestions;
}

ReflectionOutput reflect_rulebased(const TrajectoryContext& c, const Requirements& req) {
  ReflectionOutput out;
  out.provenance = "rulebased";
  out.pue = c.mean_pue.value_or(std::numeric_limits<double>::quiet_NaN());

  std::set<std::string> hot_rooms;
  bool chiller_overload = false;
  for (const auto& f : c.failures) {
    if (f.kind == FailureKind::Overheat) hot_rooms.insert(f.room);
    if (f.kind == FailureKind::ChillerOverload) chiller_overload = true;
  }
  const bool overheating = !hot_rooms.empty();
  const bool meets = c.mean_pue && *c.mean_pue <= req.target_pue;

  std::ostringstream summary;
  summary << "Summary:\n- Temperature trajectories: peak return air " << num(c.peak_t_return_c) << " C";
  if (!c.peak_room.empty()) summary << " in " << c.peak_room;
  summary << ". Overheating: ";
  if (overheating) {
    summary << "yes, above " << num(req.max_zone_temp_c) << " C in";
    for (const auto& r : hot_rooms) summary << ' ' << r;
  } else {
    summary << "no";
  }
  summary << ".\n- PUE: " << (c.mean_pue ? num(*c.mean_pue, 6) : std::string("unavailable")) << " vs target "
          << num(req.target_pue) << ": " << (meets ? "meets target" : "above target") << '.';
  out.summary = summary.str();

  std::vector<std::string> topology;
  std::vector<std::string> spatial;
  std::vector<std::string> assets;
  for (const auto& room : hot_rooms) topology.push_back(std::string(directive::kMoreAcus) + " in " + room);
  bool any_tight = false;
  for (const auto& [room, slack] : c.cooling_slack_kw) {
    if (slack < 0.0) {
      any_tight = true;
      if (!hot_rooms.count(room)) topology.push_back(std::string(directive::kMoreAcus) + " in " + room);
    }
  }
  if (!overheating && !any_tight) {
    for (const auto& [room, slack] : c.cooling_slack_kw) {
      auto heat = c.room_heat_kw.find(room);
      if (heat != c.room_heat_kw.end() && slack > 0.5 * (heat->second + slack)) {
        topology.push_back(std::string(directive::kFewerAcus) + " in " + room);
      }
    }
  }
  if (chiller_overload) topology.push_back(std::string(directive::kMoreChillers));
  const bool aisle = std::any_of(c.violated.begin(), c.violated.end(), [](const std::string& v) {
    return v == "geometry.aisle_clearance" || v == "geometry.gap";
  });
  if (aisle) spatial.push_back(std::string(directive::kWiderAisle));
  const bool short_racks = std::any_of(c.violated.begin(), c.violated.end(), [](const std::string& v) {
    return v == "power.rack" || v == "requirements.servers";
  });
  if (short_racks) {
    topology.push_back(std::string(directive::kMoreRacks));
  }
  if (c.mean_pue && !meets) {
    const double fans = c.mean_fans_kw;
    const double chillers = c.mean_chillers_kw;
    const double towers = c.mean_towers_kw;
    if (fans >= chillers && fans >= towers) {
      assets.push_back(std::string(directive::kEfficientAcu));
    } else if (chillers >= towers) {
      assets.push_back(std::string(directive::kEfficientChiller));
    } else {
      topology.push_back(std::string(directive::kMoreTowers));
    }
  }

  auto section = [](std::ostringstream& os, const char* header, const std::vector<std::string>& items) {
    os << header;
    if (items.empty()) {
      os << "\n- " << directive::kKeep;
    } else {
      for (const auto& i : items) os << "\n- " << i;
    }
  };
  std::ostringstream sug;
  sug << "Suggestions:\n";
  section(sug, "New topology design:", topology);
  sug << '\n';
  section(sug, "New spatial parameters:", spatial);
  sug << '\n';
  section(sug, "New asset selections:", assets);
  out.suggestions = sug.str();
  return out;
}

ReflectionOutput reflect_llm(const TrajectoryContext& context, const Requirements& req, const std::string& design,
                             const ChatClient& client) {
  try {
    const std::string text = client.complete(build_reflect_prompt(context, design, requirements_text(req)));
    ReflectionOutput out;
    out.provenance = "llm";
    out.pue = context.mean_pue.value_or(std::numeric_limits<double>::quiet_NaN());
    out.summary = text;
    return out;
  } catch (const Error& e) {
    ReflectionOutput out = reflect_rulebased(context, req);
    out.provenance = std::string("rulebased (llm fallback: ") + std::string(to_string(e.kind())) + ")";
    return out;
  }
}

}  // namespace dcsynth
