#include "dcsynth/physics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "dcsynth/dual.hpp"
#include "dcsynth/error.hpp"
#include "dcsynth/random.hpp"

namespace dcsynth {

namespace {

constexpr double kKelvin = 273.15;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

template <class T>
T make_var(double v, std::size_t i, std::size_t n) {
  if constexpr (std::is_same_v<T, Dual>) {
    return Dual::variable(v, i, n);
  } else {
    (void)i;
    (void)n;
    return v;
  }
}

template <class T>
T clamp_nonneg(const T& x) {
  return hard_max(x, T(0.0));
}

// min(x, cap): hard or smoothed relative to cap.
template <class T>
T clip_upper(const T& x, const T& cap, bool smooth, double sharpness) {
  if (!smooth) return hard_min(x, cap);
  if (value_of(cap) <= 0.0) return T(0.0);
  return clamp_nonneg(soft_clip_upper(x, cap, sharpness));
}

template <class T>
struct AcuGroup {
  T capacity;
  T pressure;
  T flow;
  double max_ratio = 0.0;
  int count = 0;
};

template <class T>
struct ChillerGroup {
  T capacity;
  T carnot;
  T setpoint;
  T pump;
  int count = 0;
};

template <class T>
struct TowerGroup {
  T rejection;
  T fan;
  T approach;
  int count = 0;
};

template <class T>
struct Model {
  std::vector<std::string> rooms;
  std::vector<double> room_servers;
  std::vector<std::vector<AcuGroup<T>>> room_acus;
  std::vector<ChillerGroup<T>> chillers;
  std::vector<TowerGroup<T>> towers;
  ServerSpec server;
};

template <class T>
Model<T> build_model(const Scene& scene, std::span<const ParameterHandle> handles,
                     std::span<const double> values) {
  if (values.size() != handles.size()) {
    throw Error(ErrorKind::Validation, "parameter values do not match handles");
  }
  // slot -> parameter vector lifted to T, with handle overrides applied
  std::map<std::string, std::vector<T>> params;
  auto slot_params = [&](const std::string& slot, AssetCategory cat) -> std::vector<T>& {
    auto it = params.find(slot);
    if (it != params.end()) return it->second;
    auto found = scene.slot_assets.find(slot);
    if (found == scene.slot_assets.end()) {
      throw Error(ErrorKind::UnknownModel, "scene has no slot '" + slot + "'");
    }
    if (category_of(found->second) != cat) {
      throw Error(ErrorKind::Validation, "slot '" + slot + "' is not a " + std::string(to_string(cat)));
    }
    std::vector<T> lifted;
    for (double v : parameter_vector(found->second)) lifted.emplace_back(v);
    return params.emplace(slot, std::move(lifted)).first->second;
  };
  for (std::size_t i = 0; i < handles.size(); ++i) {
    const auto& h = handles[i];
    auto& p = slot_params(h.slot, h.category);
    if (h.field >= p.size()) {
      throw Error(ErrorKind::Validation, "handle field out of range for slot '" + h.slot + "'");
    }
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::Validation, "non-finite value for " + h.slot + "." + h.field_name);
    }
    p[h.field] = make_var<T>(values[i], i, handles.size());
  }

  Model<T> m;
  m.server = scene.server;
  for (const auto& [name, room] : scene.topology.rooms) {
    m.rooms.push_back(name);
    int racks = 0;
    for (const auto& [slot, n] : room.racks) racks += n;
    m.room_servers.push_back(static_cast<double>(racks) * scene.servers_per_rack);
    std::vector<AcuGroup<T>> acus;
    for (const auto& [slot, n] : room.acus) {
      if (n <= 0) continue;
      const auto& p = slot_params(slot, AssetCategory::Acu);
      const AcuSpec& spec = scene.acu(slot);
      AcuGroup<T> g;
      g.capacity = p[acu_param::kCoolingCapacity];
      g.pressure = p[acu_param::kPressureRise];
      g.flow = p[acu_param::kDesignAirFlow];
      g.max_ratio = spec.design_air_flow_m3s > 0.0 ? spec.maximum_flow_m3s / spec.design_air_flow_m3s : 0.0;
      g.count = n;
      acus.push_back(std::move(g));
    }
    m.room_acus.push_back(std::move(acus));
  }
  for (const auto& [slot, n] : scene.topology.chillers) {
    if (n <= 0) continue;
    const auto& p = slot_params(slot, AssetCategory::Chiller);
    m.chillers.push_back({p[chiller_param::kRatedCapacity], p[chiller_param::kCarnotFraction],
                          p[chiller_param::kSupplySetpoint], p[chiller_param::kPumpFraction], n});
  }
  for (const auto& [slot, n] : scene.topology.towers) {
    if (n <= 0) continue;
    const auto& p = slot_params(slot, AssetCategory::CoolingTower);
    m.towers.push_back({p[tower_param::kRatedRejection], p[tower_param::kRatedFanPower],
                        p[tower_param::kApproach], n});
  }
  if (m.chillers.empty() || m.towers.empty()) {
    throw Error(ErrorKind::InvalidScene, "plant needs at least one chiller and one cooling tower");
  }
  return m;
}

template <class T>
struct RunTotals {
  T pue_sum{0.0};
  T temperature_sum{0.0};
  bool degenerate = false;
  bool zero_it = false;
};

template <class T>
T approach_of(const std::vector<TowerGroup<T>>& towers) {
  T weighted(0.0);
  T total(0.0);
  for (const auto& g : towers) {
    const T w = g.rejection * static_cast<double>(g.count);
    weighted += w * g.approach;
    total += w;
  }
  return value_of(total) > 0.0 ? T(weighted / total) : T(0.0);
}

template <class T>
RunTotals<T> run_model(const Model<T>& m, const SimulationInputs& in, const PhysicsConstants& k,
                       bool smooth, SimulationResult* rec) {
  RunTotals<T> totals;
  const double beta = k.smoothing_sharpness;
  auto event = [&](std::size_t step, const std::string& room, FailureKind kind, double mag) {
    if (rec) rec->failures.push_back({step, room, kind, mag});
  };
  if (rec) {
    rec->rooms = m.rooms;
    rec->steps.reserve(in.steps());
  }

  T chiller_capacity(0.0);
  for (const auto& g : m.chillers) chiller_capacity += g.capacity * static_cast<double>(g.count);
  T tower_capacity(0.0);
  for (const auto& g : m.towers) tower_capacity += g.rejection * static_cast<double>(g.count);
  const T approach = approach_of(m.towers);

  for (std::size_t t = 0; t < in.steps(); ++t) {
    const OperatingPoint& op = in.operations[t];
    const double wb = in.external[t].wet_bulb_c;
    const double per_server_power = server_power(m.server, op.utilization);
    const double per_server_heat = per_server_power * m.server.heat_factor;

    StepResult step;
    step.wet_bulb_c = wb;
    T fans(0.0);
    T q_evap(0.0);
    double p_it = 0.0;

    for (std::size_t r = 0; r < m.rooms.size(); ++r) {
      const double room_it = m.room_servers[r] * per_server_power;
      const double q_it = m.room_servers[r] * per_server_heat;
      p_it += room_it;
      const auto& acus = m.room_acus[r];
      if (acus.empty()) {
        totals.degenerate = true;
        event(t, m.rooms[r], FailureKind::NoCooling, q_it);
        if (rec) {
          step.t_return_c.push_back(kNaN);
          step.room_it_kw.push_back(room_it);
          step.room_fans_kw.push_back(0.0);
        }
        continue;
      }
      T mdot(0.0);
      T capacity(0.0);
      T room_fans(0.0);
      const double phi = op.fan_flow_ratio;
      for (const auto& g : acus) {
        const double n = static_cast<double>(g.count);
        const T flow = g.flow * phi;
        mdot += flow * (k.air_density * n);
        capacity += g.capacity * n;
        room_fans += flow * (g.pressure * (phi * phi)) * (n / (k.fan_efficiency * 1000.0));
        if (g.max_ratio > 0.0 && phi > g.max_ratio * (1.0 + 1e-12)) {
          event(t, m.rooms[r], FailureKind::FanLimit, phi - g.max_ratio);
        }
      }
      if (!(value_of(mdot) > 0.0)) {
        totals.degenerate = true;
        event(t, m.rooms[r], FailureKind::NoAirflow, q_it);
        if (rec) {
          step.t_return_c.push_back(kNaN);
          step.room_it_kw.push_back(room_it);
          step.room_fans_kw.push_back(value_of(room_fans));
        }
        fans += room_fans;
        continue;
      }
      const T t_return = T(op.supply_air_c) + T(q_it * 1000.0) / (mdot * k.air_cp);
      const T removed = clip_upper(T(q_it), capacity, smooth, beta);
      const double excess = value_of(t_return) - k.zone_max_c;
      if (excess > 0.0) {
        event(t, m.rooms[r], FailureKind::Overheat, excess);
        const T over = t_return - k.zone_max_c;
        totals.temperature_sum += over * over;
      }
      fans += room_fans;
      q_evap += removed;
      if (rec) {
        step.t_return_c.push_back(value_of(t_return));
        step.room_it_kw.push_back(room_it);
        step.room_fans_kw.push_back(value_of(room_fans));
      }
    }

    // Plant loop: chillers share the evaporator load by rated capacity.
    const T t_cond = approach + (wb + k.condenser_range_k + kKelvin);
    T p_chillers(0.0);
    T p_pumps(0.0);
    for (const auto& g : m.chillers) {
      const double n = static_cast<double>(g.count);
      const T t_evap = g.setpoint + kKelvin;
      if (!(value_of(t_cond) > value_of(t_evap))) {
        throw Error(ErrorKind::Nonphysical, "condensing temperature " + fmt(value_of(t_cond) - kKelvin) +
                                                " C not above evaporating " +
                                                fmt(value_of(t_evap) - kKelvin) + " C at step " +
                                                std::to_string(t));
      }
      const T share = value_of(chiller_capacity) > 0.0
                          ? T(q_evap * (g.capacity * n) / chiller_capacity)
                          : T(0.0);
      const T unit = share / n;
      if (value_of(unit) > value_of(g.capacity) * (1.0 + 1e-12)) {
        event(t, kPlantZone, FailureKind::ChillerOverload, value_of(unit) - value_of(g.capacity));
      }
      const T cop = g.carnot * t_evap / (t_cond - t_evap);
      p_chillers += clip_upper(unit, g.capacity, smooth, beta) * n / cop;
      p_pumps += g.pump * share;
    }

    const T reject = q_evap + p_chillers;
    T p_towers(0.0);
    T rejected(0.0);
    for (const auto& g : m.towers) {
      const double n = static_cast<double>(g.count);
      const T share = value_of(tower_capacity) > 0.0
                          ? T(reject * (g.rejection * n) / tower_capacity)
                          : T(0.0);
      rejected += share;
      const T ratio = share / n / g.rejection;
      p_towers += g.fan * clip_upper(T(ratio * ratio * ratio), T(1.0), smooth, beta) * n;
    }

    const T total = fans + p_chillers + p_towers + p_pumps + p_it;
    if (p_it > 0.0) {
      totals.pue_sum += total / p_it;
      step.pue = value_of(total) / p_it;
    } else {
      totals.zero_it = true;
      event(t, {}, FailureKind::ZeroItPower, 0.0);
      step.pue = kNaN;
    }
    if (rec) {
      step.power = {p_it, value_of(fans), value_of(p_chillers), value_of(p_towers), value_of(p_pumps)};
      step.q_removed_kw = value_of(q_evap);
      step.tower_rejection_kw = value_of(rejected);
      rec->steps.push_back(std::move(step));
    }
  }
  if (rec) {
    rec->degenerate = totals.degenerate;
    if (!totals.degenerate && !totals.zero_it) rec->mean_pue = value_of(totals.pue_sum) / in.steps();
  }
  return totals;
}

// Σ max(0, relative shortfall)² of installed capacity against the rated heat.
template <class T>
T capacity_penalty(const Model<T>& m) {
  const double per_server = m.server.peak_power_kw * m.server.heat_factor;
  T penalty(0.0);
  double heat_total = 0.0;
  auto add = [&penalty](double heat, const T& cap) {
    if (heat <= 0.0) return;
    const T s = (T(heat) - cap) / heat;
    if (value_of(s) > 0.0) penalty += s * s;
  };
  for (std::size_t r = 0; r < m.rooms.size(); ++r) {
    const double heat = m.room_servers[r] * per_server;
    heat_total += heat;
    T cap(0.0);
    for (const auto& g : m.room_acus[r]) cap += g.capacity * static_cast<double>(g.count);
    add(heat, cap);
  }
  T chillers(0.0);
  for (const auto& g : m.chillers) chillers += g.capacity * static_cast<double>(g.count);
  add(heat_total, chillers);
  T towers(0.0);
  for (const auto& g : m.towers) towers += g.rejection * static_cast<double>(g.count);
  add(heat_total, towers);
  return penalty;
}

void check_inputs(const SimulationInputs& in) {
  if (in.external.size() != in.operations.size() || in.operations.empty()) {
    throw Error(ErrorKind::SeriesMismatch,
                "weather (" + std::to_string(in.external.size()) + ") and operations (" +
                    std::to_string(in.operations.size()) + ") series must be non-empty and equal length");
  }
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string{} : cell.substr(a, b - a + 1));
  }
  return out;
}

double cell_number(const std::string& cell, std::size_t line_no, std::string_view column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": cannot parse " +
                                      std::string(column) + " value '" + cell + "'");
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Operations series

std::vector<OperatingPoint> constant_operations(std::size_t steps, OperatingPoint point) {
  return std::vector<OperatingPoint>(steps, point);
}

std::vector<OperatingPoint> case_study_operations(std::size_t steps, std::uint64_t seed,
                                                  double fan_flow_ratio, double u_lo, double u_hi) {
  Rng rng(derive_seed(seed, {0x6f7073}));
  std::vector<OperatingPoint> out;
  out.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    OperatingPoint p;
    p.utilization = rng.uniform(u_lo, u_hi);
    p.supply_air_c = rng.uniform(12.0, 22.0);
    p.fan_flow_ratio = fan_flow_ratio;
    out.push_back(p);
  }
  return out;
}

std::vector<OperatingPoint> parse_operations_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) header = split_cells(line);
  }
  if (header.empty()) throw Error(ErrorKind::Parse, "operations CSV is empty");
  constexpr std::array<std::string_view, 3> kColumns = {"utilization", "supply_air_c", "fan_flow_ratio"};
  std::array<std::size_t, 3> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw Error(ErrorKind::Parse, "operations CSV missing column '" + std::string(kColumns[c]) + "'");
    }
    index[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<OperatingPoint> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_cells(line);
    if (cells.size() < header.size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " columns");
    }
    OperatingPoint p;
    p.utilization = cell_number(cells[index[0]], line_no, kColumns[0]);
    p.supply_air_c = cell_number(cells[index[1]], line_no, kColumns[1]);
    p.fan_flow_ratio = cell_number(cells[index[2]], line_no, kColumns[2]);
    if (p.utilization < 0.0 || p.utilization > 1.0) {
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": utilization outside [0, 1]");
    }
    if (!(p.fan_flow_ratio > 0.0)) {
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": fan_flow_ratio must be > 0");
    }
    out.push_back(p);
  }
  return out;
}

std::vector<OperatingPoint> load_operations_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open operations file '" + path.string() + "'");
  return parse_operations_csv(in);
}

void write_operations_csv(std::span<const OperatingPoint> ops, std::ostream& out) {
  out << "step,utilization,supply_air_c,fan_flow_ratio\n";
  for (std::size_t i = 0; i < ops.size(); ++i) {
    out << i << ',' << fmt(ops[i].utilization) << ',' << fmt(ops[i].supply_air_c) << ','
        << fmt(ops[i].fan_flow_ratio) << '\n';
  }
}

SimulationInputs make_inputs(std::span<const WeatherRecord> weather,
                             std::span<const OperatingPoint> operations) {
  SimulationInputs in;
  in.external.reserve(weather.size());
  for (const auto& w : weather) in.external.push_back(external_conditions(w));
  in.operations.assign(operations.begin(), operations.end());
  check_inputs(in);
  return in;
}

// ---------------------------------------------------------------------------
// Components

double server_power(const ServerSpec& spec, double u) {
  return spec.idle_power_kw + u * (spec.peak_power_kw - spec.idle_power_kw);
}

double server_heat(const ServerSpec& spec, double u) { return spec.heat_factor * server_power(spec, u); }

RoomThermal room_thermal_step(const RoomAssets& room, double u, double t_sup, double phi, SimMode mode,
                              const PhysicsConstants& k) {
  double acu_count = 0;
  for (const auto& [spec, n] : room.acus) acu_count += n;
  if (acu_count <= 0) throw Error(ErrorKind::NoAcu, "room has no ACU");
  if (!(phi > 0.0)) throw Error(ErrorKind::Validation, "fan_flow_ratio must be > 0");
  double servers = 0;
  for (const auto& [spec, n] : room.racks) servers += static_cast<double>(n) * room.servers_per_rack;

  RoomThermal out;
  out.it_heat_kw = servers * server_heat(room.server, u);
  double capacity = 0.0;
  for (const auto& [spec, n] : room.acus) {
    const double flow = phi * spec.design_air_flow_m3s;
    out.air_mass_flow_kgs += n * k.air_density * flow;
    capacity += n * spec.cooling_capacity_kw;
    out.fan_power_kw += n * flow * spec.pressure_rise_pa * phi * phi / k.fan_efficiency / 1000.0;
  }
  out.t_return_c = t_sup + out.it_heat_kw * 1000.0 / (out.air_mass_flow_kgs * k.air_cp);
  out.q_removed_kw = clip_upper(out.it_heat_kw, capacity, mode == SimMode::Smooth, k.smoothing_sharpness);
  return out;
}

ChillerOutput chiller_step(const ChillerSpec& spec, double q_evap, double wb, const TowerSpec& tower,
                           SimMode mode, const PhysicsConstants& k) {
  const double t_evap = spec.chw_supply_setpoint_c + kKelvin;
  const double t_cond = wb + tower.approach_k + k.condenser_range_k + kKelvin;
  if (!(t_cond > t_evap)) {
    throw Error(ErrorKind::Nonphysical, "condensing temperature not above evaporating temperature");
  }
  ChillerOutput out;
  out.cop = spec.carnot_fraction * t_evap / (t_cond - t_evap);
  out.overloaded = q_evap > spec.rated_capacity_kw;
  const double load =
      clip_upper(q_evap, spec.rated_capacity_kw, mode == SimMode::Smooth, k.smoothing_sharpness);
  out.power_kw = load / out.cop;
  return out;
}

double tower_step(const TowerSpec& spec, double q_reject, SimMode mode, const PhysicsConstants& k) {
  const double ratio = q_reject / spec.rated_heat_rejection_kw;
  return spec.rated_fan_power_kw *
         clip_upper(ratio * ratio * ratio, 1.0, mode == SimMode::Smooth, k.smoothing_sharpness);
}

// ---------------------------------------------------------------------------
// Simulation

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::Overheat: return "overheat";
    case FailureKind::ChillerOverload: return "chiller_overload";
    case FailureKind::NoCooling: return "no_cooling";
    case FailureKind::NoAirflow: return "no_airflow";
    case FailureKind::FanLimit: return "fan_limit";
    case FailureKind::ZeroItPower: return "zero_it_power";
  }
  return "unknown";
}

double pue(const SimulationResult& result) {
  if (result.degenerate) {
    throw Error(ErrorKind::Degenerate, "facility has a room without cooling airflow");
  }
  if (result.steps.empty()) throw Error(ErrorKind::ZeroItPower, "empty trajectory");
  double sum = 0.0;
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const auto& p = result.steps[i].power;
    if (!(p.it > 0.0)) {
      throw Error(ErrorKind::ZeroItPower, "IT power is zero at step " + std::to_string(i));
    }
    sum += p.total() / p.it;
  }
  return sum / static_cast<double>(result.steps.size());
}

double max_energy_imbalance(const SimulationResult& result) {
  double worst = 0.0;
  for (const auto& s : result.steps) {
    const double expected = s.q_removed_kw + s.power.chillers;
    const double scale = std::max(std::abs(expected), 1e-300);
    worst = std::max(worst, std::abs(s.tower_rejection_kw - expected) / scale);
  }
  return worst;
}

SimulationResult simulate(const Scene& scene, const SimulationInputs& inputs, const SimOptions& options) {
  check_inputs(inputs);
  const auto model = build_model<double>(scene, {}, {});
  SimulationResult result;
  run_model(model, inputs, options.constants, options.mode == SimMode::Smooth, &result);
  return result;
}

SimulationResult simulate(const Scene& scene, std::span<const WeatherRecord> weather,
                          std::span<const OperatingPoint> operations, const SimOptions& options) {
  return simulate(scene, make_inputs(weather, operations), options);
}

void write_trajectory_csv(const SimulationResult& result, std::ostream& out) {
  out << "step,room,T_return_c,p_it_kw,p_fans_kw,p_chillers_kw,p_towers_kw,p_pumps_kw,pue_step\n";
  for (std::size_t t = 0; t < result.steps.size(); ++t) {
    const auto& s = result.steps[t];
    for (std::size_t r = 0; r < result.rooms.size(); ++r) {
      out << t << ',' << result.rooms[r] << ',' << fmt(s.t_return_c[r]) << ',' << fmt(s.power.it) << ','
          << fmt(s.power.acu_fans) << ',' << fmt(s.power.chillers) << ',' << fmt(s.power.towers) << ','
          << fmt(s.power.pumps) << ',' << fmt(s.pue) << '\n';
    }
  }
}

std::vector<double> handle_values(const Scene& scene, std::span<const ParameterHandle> handles) {
  std::vector<double> out;
  out.reserve(handles.size());
  for (const auto& h : handles) {
    auto it = scene.slot_assets.find(h.slot);
    if (it == scene.slot_assets.end()) {
      throw Error(ErrorKind::UnknownModel, "scene has no slot '" + h.slot + "'");
    }
    out.push_back(parameter_vector(it->second).at(h.field));
  }
  return out;
}

ObjectiveTerms evaluate_objective(const Scene& scene, const SimulationInputs& inputs,
                                  std::span<const ParameterHandle> handles, std::span<const double> values,
                                  bool gradient, const PhysicsConstants& k) {
  check_inputs(inputs);
  ObjectiveTerms out;
  const double steps = static_cast<double>(inputs.steps());
  auto finish = [&](auto totals, auto cap_penalty) {
    if (totals.degenerate) throw Error(ErrorKind::Degenerate, "facility has a room without cooling airflow");
    if (totals.zero_it) throw Error(ErrorKind::ZeroItPower, "IT power is zero");
    const auto mean = totals.pue_sum / steps;
    const auto temp = totals.temperature_sum / steps;
    out.mean_pue = value_of(mean);
    out.temperature_penalty = value_of(temp);
    out.capacity_penalty = value_of(cap_penalty);
    if constexpr (std::is_same_v<decltype(mean), const Dual>) {
      const auto pen = temp + cap_penalty;
      for (std::size_t i = 0; i < handles.size(); ++i) {
        out.d_mean_pue.push_back(mean.partial(i));
        out.d_penalty.push_back(pen.partial(i));
      }
    }
  };
  if (gradient) {
    const auto model = build_model<Dual>(scene, handles, values);
    finish(run_model(model, inputs, k, true, nullptr), capacity_penalty(model));
  } else {
    const auto model = build_model<double>(scene, handles, values);
    finish(run_model(model, inputs, k, true, nullptr), capacity_penalty(model));
  }
  return out;
}

GradientResult simulate_gradient(const Scene& scene, const SimulationInputs& inputs,
                                 std::span<const ParameterHandle> handles, const PhysicsConstants& k) {
  check_inputs(inputs);
  const auto values = handle_values(scene, handles);
  const auto model = build_model<Dual>(scene, handles, values);
  GradientResult out;
  const auto totals = run_model(model, inputs, k, true, &out.result);
  if (!totals.degenerate && !totals.zero_it) {
    const Dual mean = totals.pue_sum / static_cast<double>(inputs.steps());
    for (std::size_t i = 0; i < handles.size(); ++i) out.d_mean_pue.push_back(mean.partial(i));
  }
  return out;
}

}  // namespace dcsynth
