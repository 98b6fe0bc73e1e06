#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dcsynth/assets.hpp"
#include "dcsynth/physics.hpp"
#include "dcsynth/scene.hpp"

namespace dcsynth {

struct OptimizationConfig {
  int max_steps = 200;
  double learning_rate = 0.05;  // in normalized [0, 1] parameter space
  double penalty_weight = 10.0;
  double penalty_growth = 2.0;
  int growth_interval = 50;
  double convergence_tol = 1e-6;

  void validate() const;
};

// Objective value and partials for a box-constrained problem.
struct ObjectiveSample {
  double value = 0.0;    // z
  double penalty = 0.0;  // Σ max(0, g)²
  std::vector<double> d_value;
  std::vector<double> d_penalty;
};

using ObjectiveFunction = std::function<ObjectiveSample(std::span<const double> x, bool gradient)>;

struct TraceRow {
  int step = 0;
  double objective = 0.0;  // z + λ·penalty
  double value = 0.0;
  double penalty = 0.0;
  double lambda = 0.0;
  bool accepted = false;
  std::vector<double> x;
};

struct BoxResult {
  std::vector<double> x;
  double initial_objective = 0.0;  // under the final λ
  double objective = 0.0;          // under the final λ
  double value = 0.0;
  double penalty = 0.0;
  double lambda = 0.0;
  int steps = 0;
  int accepted = 0;
  std::vector<TraceRow> trace;
};

// Projected descent on z + λ·penalty: Adam-scaled steps in normalized
// coordinates, clamped to the box, accepted only when the penalized objective
// does not increase (the step size halves otherwise). λ grows by
// `penalty_growth` every `growth_interval` steps. The result is never worse
// than the start under the final λ. `names` label non-finite gradient errors.
BoxResult minimize_box(const ObjectiveFunction& f, std::span<const double> lower,
                       std::span<const double> upper, std::span<const double> start,
                       const OptimizationConfig& config, std::span<const std::string> names = {});

// Handles for every continuous field of the scene's ACU, chiller and tower
// slots. Bounds are the library category's min/max of the field, widened to
// include the current value.
std::vector<ParameterHandle> optimizable_handles(const Scene& scene, const AssetLibrary& library);

struct IdealAssetSet {
  std::vector<ParameterHandle> handles;
  std::vector<double> values;                          // per handle
  std::map<std::string, std::vector<double>> alpha;    // slot -> full parameter vector
  double initial_objective = 0.0;
  double objective = 0.0;
  double mean_pue = 0.0;
  double penalty = 0.0;
  int steps = 0;
  std::vector<TraceRow> trace;
};

IdealAssetSet optimize_parameters(const Scene& scene, const SimulationInputs& inputs,
                                  const AssetLibrary& library, const OptimizationConfig& config = {},
                                  const PhysicsConstants& constants = {});

void write_trace_csv(const IdealAssetSet& ideal, std::ostream& out);

enum class Normalization {
  ZScore,  // per-field z-score over the library category
  Raw,     // raw units
};

struct NearestMatch {
  AssetSpec asset;
  double distance = 0.0;
};

// Euclidean nearest asset of `category`; ties go to the lower asset id.
// Throws Error(EmptyCategory).
NearestMatch select_nearest(std::span<const double> alpha, AssetCategory category,
                            const AssetLibrary& library, Normalization norm = Normalization::ZScore);

// Rebinds every slot in `ideal.alpha` to its nearest library asset and
// re-places the scene. Topology and layout are left untouched.
Scene refine_scene(const Scene& scene, const IdealAssetSet& ideal, const AssetLibrary& library,
                   Normalization norm = Normalization::ZScore);

}  // namespace dcsynth
