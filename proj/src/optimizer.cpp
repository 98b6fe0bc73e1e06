#include "dcsynth/optimizer.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "dcsynth/error.hpp"

namespace dcsynth {

void OptimizationConfig::validate() const {
  if (max_steps < 1) throw Error(ErrorKind::Config, "maxSteps must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::Config, "learningRate must be > 0");
  if (!(penalty_weight >= 0.0)) throw Error(ErrorKind::Config, "penaltyWeight must be >= 0");
  if (!(penalty_growth >= 1.0)) throw Error(ErrorKind::Config, "penaltyGrowth must be >= 1");
  if (growth_interval < 1) throw Error(ErrorKind::Config, "growth interval must be >= 1");
  if (!(convergence_tol >= 0.0)) throw Error(ErrorKind::Config, "convergenceTol must be >= 0");
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
constexpr double kMinRate = 1e-9;

std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

BoxResult minimize_box(const ObjectiveFunction& f, std::span<const double> lower,
                       std::span<const double> upper, std::span<const double> start,
                       const OptimizationConfig& config, std::span<const std::string> names) {
  config.validate();
  const std::size_t n = start.size();
  if (lower.size() != n || upper.size() != n) {
    throw Error(ErrorKind::Validation, "bounds do not match the parameter count");
  }
  std::vector<double> range(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i]) {
      throw Error(ErrorKind::Validation, "invalid bounds for parameter " + std::to_string(i));
    }
    range[i] = upper[i] - lower[i];
  }
  auto to_physical = [&](const std::vector<double>& x) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lower[i] + x[i] * range[i];
    return v;
  };
  auto label = [&](std::size_t i) { return i < names.size() ? names[i] : "parameter " + std::to_string(i); };

  struct Point {
    std::vector<double> x;
    ObjectiveSample s;
  };
  auto sample = [&](std::vector<double> x, bool gradient) {
    Point p{std::move(x), {}};
    p.s = f(to_physical(p.x), gradient);
    if (gradient) {
      for (std::size_t i = 0; i < n; ++i) {
        const double dv = i < p.s.d_value.size() ? p.s.d_value[i] : 0.0;
        const double dp = i < p.s.d_penalty.size() ? p.s.d_penalty[i] : 0.0;
        if (!std::isfinite(dv) || !std::isfinite(dp)) {
          throw Error(ErrorKind::NonFiniteGradient, "non-finite gradient for " + label(i));
        }
      }
    }
    return p;
  };
  auto penalized = [](const ObjectiveSample& s, double lambda) { return s.value + lambda * s.penalty; };

  std::vector<double> x0(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    x0[i] = range[i] > 0.0 ? std::clamp((start[i] - lower[i]) / range[i], 0.0, 1.0) : 0.0;
  }
  const Point initial = sample(x0, true);
  Point cur = initial;
  double lambda = config.penalty_weight;
  double rate = config.learning_rate;
  std::vector<double> m(n, 0.0);
  std::vector<double> v(n, 0.0);
  int adam_t = 0;

  BoxResult out;
  out.trace.push_back({0, penalized(cur.s, lambda), cur.s.value, cur.s.penalty, lambda, true, to_physical(cur.x)});

  int step = 1;
  for (; step <= config.max_steps; ++step) {
    if (step > 1 && (step - 1) % config.growth_interval == 0) lambda *= config.penalty_growth;
    const double f_cur = penalized(cur.s, lambda);

    ++adam_t;
    std::vector<double> next(n);
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (range[i] <= 0.0) {
        next[i] = cur.x[i];
        continue;
      }
      const double dv = i < cur.s.d_value.size() ? cur.s.d_value[i] : 0.0;
      const double dp = i < cur.s.d_penalty.size() ? cur.s.d_penalty[i] : 0.0;
      const double g = (dv + lambda * dp) * range[i];
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
      const double mh = m[i] / (1.0 - std::pow(kBeta1, adam_t));
      const double vh = v[i] / (1.0 - std::pow(kBeta2, adam_t));
      next[i] = std::clamp(cur.x[i] - rate * mh / (std::sqrt(vh) + kEps), 0.0, 1.0);
      if (next[i] != cur.x[i]) moved = true;
    }
    if (!moved) {
      out.trace.push_back({step, f_cur, cur.s.value, cur.s.penalty, lambda, false, to_physical(cur.x)});
      break;
    }
    Point cand = sample(std::move(next), true);
    const double f_cand = penalized(cand.s, lambda);
    if (f_cand <= f_cur) {
      cur = std::move(cand);
      ++out.accepted;
      out.trace.push_back({step, f_cand, cur.s.value, cur.s.penalty, lambda, true, to_physical(cur.x)});
      if (f_cur - f_cand < config.convergence_tol) break;
    } else {
      rate *= 0.5;
      out.trace.push_back({step, f_cand, cand.s.value, cand.s.penalty, lambda, false, to_physical(cand.x)});
      if (rate < kMinRate) break;
    }
  }
  out.steps = std::min(step, config.max_steps);
  out.lambda = lambda;
  out.initial_objective = penalized(initial.s, lambda);
  const Point& best = penalized(cur.s, lambda) <= out.initial_objective ? cur : initial;
  out.x = to_physical(best.x);
  for (std::size_t i = 0; i < n; ++i) {
    if (range[i] <= 0.0) out.x[i] = start[i];
  }
  out.objective = penalized(best.s, lambda);
  out.value = best.s.value;
  out.penalty = best.s.penalty;
  return out;
}

std::vector<ParameterHandle> optimizable_handles(const Scene& scene, const AssetLibrary& library) {
  std::vector<ParameterHandle> out;
  for (const auto& [slot, spec] : scene.slot_assets) {
    const AssetCategory cat = category_of(spec);
    if (cat != AssetCategory::Acu && cat != AssetCategory::Chiller && cat != AssetCategory::CoolingTower) {
      continue;
    }
    const auto fields = parameter_fields(cat);
    const auto current = parameter_vector(spec);
    std::vector<double> lo = current;
    std::vector<double> hi = current;
    for (const auto& asset : library.assets(cat)) {
      const auto p = parameter_vector(asset);
      for (std::size_t i = 0; i < p.size(); ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      out.push_back({slot, cat, i, std::string(fields[i]), lo[i], hi[i]});
    }
  }
  return out;
}

IdealAssetSet optimize_parameters(const Scene& scene, const SimulationInputs& inputs,
                                  const AssetLibrary& library, const OptimizationConfig& config,
                                  const PhysicsConstants& constants) {
  IdealAssetSet out;
  out.handles = optimizable_handles(scene, library);
  const auto start = handle_values(scene, out.handles);
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> names;
  for (const auto& h : out.handles) {
    lower.push_back(h.lower);
    upper.push_back(h.upper);
    names.push_back(h.slot + "." + h.field_name);
  }
  const auto& handles = out.handles;
  ObjectiveFunction f = [&](std::span<const double> x, bool gradient) {
    const ObjectiveTerms t = evaluate_objective(scene, inputs, handles, x, gradient, constants);
    return ObjectiveSample{t.mean_pue, t.penalty(), t.d_mean_pue, t.d_penalty};
  };
  const BoxResult r = minimize_box(f, lower, upper, start, config, names);

  out.values = r.x;
  out.initial_objective = r.initial_objective;
  out.objective = r.objective;
  out.mean_pue = r.value;
  out.penalty = r.penalty;
  out.steps = r.steps;
  out.trace = r.trace;
  for (const auto& [slot, spec] : scene.slot_assets) {
    const AssetCategory cat = category_of(spec);
    if (cat == AssetCategory::Acu || cat == AssetCategory::Chiller || cat == AssetCategory::CoolingTower) {
      out.alpha[slot] = parameter_vector(spec);
    }
  }
  for (std::size_t i = 0; i < handles.size(); ++i) out.alpha[handles[i].slot][handles[i].field] = out.values[i];
  return out;
}

void write_trace_csv(const IdealAssetSet& ideal, std::ostream& out) {
  out << "step,objective,mean_pue,penalty,lambda,accepted";
  for (const auto& h : ideal.handles) out << ',' << h.slot << '.' << h.field_name;
  out << '\n';
  for (const auto& row : ideal.trace) {
    out << row.step << ',' << fmt(row.objective) << ',' << fmt(row.value) << ',' << fmt(row.penalty) << ','
        << fmt(row.lambda) << ',' << (row.accepted ? 1 : 0);
    for (double x : row.x) out << ',' << fmt(x);
    out << '\n';
  }
}

NearestMatch select_nearest(std::span<const double> alpha, AssetCategory category,
                            const AssetLibrary& library, Normalization norm) {
  const auto assets = library.assets(category);
  if (assets.empty()) {
    throw Error(ErrorKind::EmptyCategory, "library has no " + std::string(to_string(category)) + " assets");
  }
  const std::size_t dim = parameter_fields(category).size();
  if (alpha.size() != dim) {
    throw Error(ErrorKind::Validation, "parameter vector has " + std::to_string(alpha.size()) +
                                           " entries, expected " + std::to_string(dim));
  }
  std::vector<std::vector<double>> betas;
  betas.reserve(assets.size());
  for (const auto& a : assets) betas.push_back(parameter_vector(a));

  std::vector<double> mean(dim, 0.0);
  std::vector<double> scale(dim, 1.0);
  if (norm == Normalization::ZScore) {
    const double count = static_cast<double>(betas.size());
    for (const auto& b : betas) {
      for (std::size_t i = 0; i < dim; ++i) mean[i] += b[i] / count;
    }
    for (std::size_t i = 0; i < dim; ++i) {
      double var = 0.0;
      for (const auto& b : betas) var += (b[i] - mean[i]) * (b[i] - mean[i]) / count;
      scale[i] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
  }
  // assets() is sorted by id, so a strict comparison keeps the lowest id on ties
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < betas.size(); ++k) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = (alpha[i] - betas[k][i]) / scale[i];
      d2 += d * d;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  return {assets[best], std::sqrt(best_d2)};
}

Scene refine_scene(const Scene& scene, const IdealAssetSet& ideal, const AssetLibrary& library,
                   Normalization norm) {
  auto bindings = scene.bindings();
  for (const auto& [slot, alpha] : ideal.alpha) {
    auto it = scene.slot_assets.find(slot);
    if (it == scene.slot_assets.end()) {
      throw Error(ErrorKind::UnknownModel, "scene has no slot '" + slot + "'");
    }
    bindings[slot] = id_of(select_nearest(alpha, category_of(it->second), library, norm).asset);
  }
  Scene refined = resynthesize(scene, library, bindings);
  refined.layout = scene.layout;
  refined.topology = scene.topology;
  return refined;
}

}  // namespace dcsynth
