#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace dcsynth {

// Forward-mode dual number with a runtime-sized gradient.
//
// An empty `d` means "constant": every partial is zero. Binary operations
// accept operands of different gradient length and treat missing entries as
// zero, so constants never allocate.
struct Dual {
  double v = 0.0;
  std::vector<double> d;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Dual(double value, std::vector<double> partials) : v(value), d(std::move(partials)) {}

  static Dual variable(double value, std::size_t index, std::size_t n) {
    Dual x(value);
    x.d.assign(n, 0.0);
    x.d[index] = 1.0;
    return x;
  }

  double partial(std::size_t i) const { return i < d.size() ? d[i] : 0.0; }
};

namespace dual_detail {

// out.d = a * x.d + b * y.d
inline std::vector<double> combine(double a, const std::vector<double>& x, double b,
                                   const std::vector<double>& y) {
  std::vector<double> out(std::max(x.size(), y.size()), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += a * x[i];
  for (std::size_t i = 0; i < y.size(); ++i) out[i] += b * y[i];
  return out;
}

inline std::vector<double> scale(double a, std::vector<double> x) {
  for (double& xi : x) xi *= a;
  return x;
}

}  // namespace dual_detail

inline Dual operator-(const Dual& a) { return {-a.v, dual_detail::scale(-1.0, a.d)}; }

inline Dual operator+(const Dual& a, const Dual& b) {
  if (b.d.empty()) return {a.v + b.v, a.d};
  if (a.d.empty()) return {a.v + b.v, b.d};
  return {a.v + b.v, dual_detail::combine(1.0, a.d, 1.0, b.d)};
}

inline Dual operator-(const Dual& a, const Dual& b) {
  if (b.d.empty()) return {a.v - b.v, a.d};
  return {a.v - b.v, dual_detail::combine(1.0, a.d, -1.0, b.d)};
}

inline Dual operator*(const Dual& a, const Dual& b) {
  if (b.d.empty()) return {a.v * b.v, dual_detail::scale(b.v, a.d)};
  if (a.d.empty()) return {a.v * b.v, dual_detail::scale(a.v, b.d)};
  return {a.v * b.v, dual_detail::combine(b.v, a.d, a.v, b.d)};
}

inline Dual operator/(const Dual& a, const Dual& b) {
  const double q = a.v / b.v;
  if (b.d.empty()) return {q, dual_detail::scale(1.0 / b.v, a.d)};
  return {q, dual_detail::combine(1.0 / b.v, a.d, -q / b.v, b.d)};
}

inline Dual& operator+=(Dual& a, const Dual& b) { return a = a + b; }
inline Dual& operator-=(Dual& a, const Dual& b) { return a = a - b; }
inline Dual& operator*=(Dual& a, const Dual& b) { return a = a * b; }
inline Dual& operator/=(Dual& a, const Dual& b) { return a = a / b; }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }

inline Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return {e, dual_detail::scale(e, a.d)};
}

inline Dual log(const Dual& a) { return {std::log(a.v), dual_detail::scale(1.0 / a.v, a.d)}; }

inline Dual log1p(const Dual& a) {
  return {std::log1p(a.v), dual_detail::scale(1.0 / (1.0 + a.v), a.d)};
}

inline Dual sqrt(const Dual& a) {
  const double s = std::sqrt(a.v);
  return {s, dual_detail::scale(0.5 / s, a.d)};
}

inline Dual pow(const Dual& a, double p) {
  const double y = std::pow(a.v, p);
  return {y, dual_detail::scale(p * std::pow(a.v, p - 1.0), a.d)};
}

inline Dual abs(const Dual& a) { return a.v < 0.0 ? -a : a; }

// Value-level helpers that work for both double and Dual.
inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

// Hard selection; the gradient follows the selected branch.
template <class T>
T hard_min(const T& a, const T& b) {
  return value_of(b) < value_of(a) ? b : a;
}

template <class T>
T hard_max(const T& a, const T& b) {
  return value_of(b) > value_of(a) ? b : a;
}

// Smooth minimum -(1/k) log(exp(-k a) + exp(-k b)), written in the
// overflow-free form min(a,b) - log1p(exp(-k|a-b|))/k. Always <= min(a,b).
template <class T>
T soft_min(const T& a, const T& b, double sharpness) {
  using std::exp;
  using std::log1p;
  const T gap = value_of(a) <= value_of(b) ? T(b - a) : T(a - b);
  return hard_min(a, b) - log1p(exp(-sharpness * gap)) / sharpness;
}

// Smooth clip of `x` to at most `cap`, with smoothing width proportional to
// cap: cap * soft_min(x / cap, 1; sharpness).
template <class T>
T soft_clip_upper(const T& x, const T& cap, double sharpness) {
  return cap * soft_min(T(x / cap), T(1.0), sharpness);
}

}  // namespace dcsynth
