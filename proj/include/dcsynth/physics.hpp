#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcsynth/assets.hpp"
#include "dcsynth/scene.hpp"
#include "dcsynth/weather.hpp"

namespace dcsynth {

struct PhysicsConstants {
  double air_density = 1.2;         // kg/m³
  double air_cp = 1005.0;           // J/(kg·K)
  double fan_efficiency = 0.65;
  double condenser_range_k = 5.0;
  double zone_max_c = 30.0;
  // Sharpness of the smoothed min/clip on load ratios (dimensionless, the
  // smoothing width is capacity / sharpness).
  double smoothing_sharpness = 50.0;
};

enum class SimMode {
  Evaluate,  // hard min/clip: faithful constraint verdicts
  Smooth,    // soft min/clip: the differentiable model
};

struct SimOptions {
  SimMode mode = SimMode::Evaluate;
  PhysicsConstants constants{};
};

// One hour of operational inputs.
struct OperatingPoint {
  double utilization = 0.7;
  double supply_air_c = 18.0;
  double fan_flow_ratio = 0.6;

  friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

std::vector<OperatingPoint> constant_operations(std::size_t steps, OperatingPoint point = {});

// Case-study style operations: utilization uniform in [u_lo, u_hi] and supply
// air uniform in [12, 22] °C, seeded; fixed fan ratio.
std::vector<OperatingPoint> case_study_operations(std::size_t steps, std::uint64_t seed,
                                                  double fan_flow_ratio = 0.5, double u_lo = 0.3,
                                                  double u_hi = 0.9);

// CSV with columns step,utilization,supply_air_c,fan_flow_ratio.
std::vector<OperatingPoint> parse_operations_csv(std::istream& in);
std::vector<OperatingPoint> load_operations_csv(const std::filesystem::path& path);
void write_operations_csv(std::span<const OperatingPoint> ops, std::ostream& out);

// Validated, precomputed inputs: wet-bulb etc. derived once per series.
struct SimulationInputs {
  std::vector<ExternalConditions> external;
  std::vector<OperatingPoint> operations;

  std::size_t steps() const { return operations.size(); }
};

// Throws Error(SeriesMismatch) on unequal lengths or empty series.
SimulationInputs make_inputs(std::span<const WeatherRecord> weather,
                             std::span<const OperatingPoint> operations);

// ---------------------------------------------------------------------------
// Component models

// idle + u (peak - idle), kW.
double server_power(const ServerSpec& spec, double utilization);
double server_heat(const ServerSpec& spec, double utilization);

struct RoomAssets {
  std::vector<std::pair<AcuSpec, int>> acus;
  std::vector<std::pair<RackSpec, int>> racks;
  ServerSpec server;
  int servers_per_rack = 8;
};

struct RoomThermal {
  double it_heat_kw = 0.0;
  double t_return_c = 0.0;
  double q_removed_kw = 0.0;
  double fan_power_kw = 0.0;
  double air_mass_flow_kgs = 0.0;
};

// Sensible air heat balance of one room. Throws Error(NoAcu) without ACUs.
RoomThermal room_thermal_step(const RoomAssets& room, double utilization, double supply_air_c,
                              double fan_flow_ratio, SimMode mode = SimMode::Evaluate,
                              const PhysicsConstants& k = {});

struct ChillerOutput {
  double power_kw = 0.0;
  double cop = 0.0;
  bool overloaded = false;
};

// Carnot-fraction chiller. Condensing temperature is wet-bulb + tower
// approach + condenser range. Throws Error(Nonphysical) when T_cond <= T_evap.
ChillerOutput chiller_step(const ChillerSpec& spec, double q_evap_kw, double wet_bulb_c,
                           const TowerSpec& tower, SimMode mode = SimMode::Evaluate,
                           const PhysicsConstants& k = {});

// Fan affinity: rated fan power × (load ratio)³, clipped at rated fan power.
double tower_step(const TowerSpec& spec, double q_reject_kw, SimMode mode = SimMode::Evaluate,
                  const PhysicsConstants& k = {});

// ---------------------------------------------------------------------------
// Whole-scene simulation

struct PowerBreakdown {
  double it = 0.0;
  double acu_fans = 0.0;
  double chillers = 0.0;
  double towers = 0.0;
  double pumps = 0.0;

  double cooling() const { return acu_fans + chillers + towers + pumps; }
  double total() const { return it + cooling(); }
};

struct StepResult {
  std::vector<double> t_return_c;   // per room, scene room order
  std::vector<double> room_it_kw;
  std::vector<double> room_fans_kw;
  PowerBreakdown power;
  double q_removed_kw = 0.0;        // Σ rooms
  double tower_rejection_kw = 0.0;  // Σ towers
  double wet_bulb_c = 0.0;
  double pue = 0.0;
};

enum class FailureKind { Overheat, ChillerOverload, NoCooling, NoAirflow, FanLimit, ZeroItPower };

std::string_view to_string(FailureKind kind);

struct FailureEvent {
  std::size_t step = 0;
  std::string room;
  FailureKind kind = FailureKind::Overheat;
  double magnitude = 0.0;
};

struct SimulationResult {
  std::vector<std::string> rooms;
  std::vector<StepResult> steps;
  std::vector<FailureEvent> failures;
  // Set when the facility cannot be evaluated (no ACU in a room, zero
  // airflow): PUE is then reported as a failure.
  bool degenerate = false;
  std::optional<double> mean_pue;
};

// Mean of per-step total / IT power. Throws Error(Degenerate) or
// Error(ZeroItPower).
double pue(const SimulationResult& result);

// Per-step tower rejection minus (room heat removed + chiller power),
// relative to the step's rejection; the maximum over all steps.
double max_energy_imbalance(const SimulationResult& result);

// Requires a chiller and a tower in the plant (Error(InvalidScene)).
SimulationResult simulate(const Scene& scene, const SimulationInputs& inputs,
                          const SimOptions& options = {});
SimulationResult simulate(const Scene& scene, std::span<const WeatherRecord> weather,
                          std::span<const OperatingPoint> operations,
                          const SimOptions& options = {});

void write_trajectory_csv(const SimulationResult& result, std::ostream& out);

// ---------------------------------------------------------------------------
// Differentiation

// A continuous field of the asset bound to a scene slot.
struct ParameterHandle {
  std::string slot;
  AssetCategory category = AssetCategory::Acu;
  std::size_t field = 0;  // index into parameter_fields(category)
  std::string field_name;
  double lower = 0.0;
  double upper = 0.0;
};

// Penalized-objective ingredients evaluated under the smoothed model.
struct ObjectiveTerms {
  double mean_pue = 0.0;
  double temperature_penalty = 0.0;  // mean over steps of Σ rooms max(0, T_ret - T_max)², K²
  double capacity_penalty = 0.0;     // Σ max(0, relative shortfall)² of ACU/chiller/tower capacity
  std::vector<double> d_mean_pue;    // per handle (empty without gradient)
  std::vector<double> d_penalty;     // d(temperature + capacity penalty) per handle

  double penalty() const { return temperature_penalty + capacity_penalty; }
};

// Evaluates the smoothed model with `values[i]` substituted for handle i.
// With `gradient`, partials are computed by forward-mode dual numbers.
ObjectiveTerms evaluate_objective(const Scene& scene, const SimulationInputs& inputs,
                                  std::span<const ParameterHandle> handles,
                                  std::span<const double> values, bool gradient,
                                  const PhysicsConstants& k = {});

struct GradientResult {
  SimulationResult result;       // smoothed-model trajectory
  std::vector<double> d_mean_pue;
};

GradientResult simulate_gradient(const Scene& scene, const SimulationInputs& inputs,
                                 std::span<const ParameterHandle> handles,
                                 const PhysicsConstants& k = {});

// Current values of the handles' fields in the scene.
std::vector<double> handle_values(const Scene& scene, std::span<const ParameterHandle> handles);

}  // namespace dcsynth
