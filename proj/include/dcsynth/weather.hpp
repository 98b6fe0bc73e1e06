#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace dcsynth {

struct WeatherRecord {
  int hour = 0;  // 0-based
  double dry_bulb_c = 0.0;
  double rh_pct = 0.0;
  double pressure_pa = 101325.0;

  friend bool operator==(const WeatherRecord&, const WeatherRecord&) = default;
};

struct ExternalConditions {
  double dry_bulb_c = 0.0;
  double wet_bulb_c = 0.0;
  double humidity_ratio = 0.0;
  // RH outside the Stull fit range [5, 99] %: still evaluated, but flagged.
  bool outside_stull_range = false;
};

// Stull (2011) wet-bulb fit with coefficients 0.152, 8.314, 1.676, 0.00392,
// 0.023, 4.686; arctangents in radians. T in °C, RH in percent.
double stull_formula(double dry_bulb_c, double rh_pct);

// stull_formula bounded above by the dry-bulb temperature. The raw fit
// overshoots T by up to ~0.19 °C at RH >= 99 %.
double wet_bulb_stull(double dry_bulb_c, double rh_pct);

bool in_stull_range(double rh_pct);

// Arden Buck saturation vapour pressure over liquid water, Pa.
double saturation_vapor_pressure(double t_c);

// w = 0.622 Pv / (P - Pv), Pv = RH * Pws / 100. Throws Error(Nonphysical)
// when Pv >= P.
double humidity_ratio(double t_c, double rh_pct, double pressure_pa);

ExternalConditions external_conditions(const WeatherRecord& record);

// CSV with header naming hour,dry_bulb_c,rh_pct,pressure_pa (any column
// order; extra columns ignored). Rows are validated: RH in [0, 100], P > 0.
std::vector<WeatherRecord> parse_weather_csv(std::istream& in);
std::vector<WeatherRecord> load_weather_csv(const std::filesystem::path& path);
void write_weather_csv(std::span<const WeatherRecord> records, std::ostream& out);

struct WeatherSummary {
  std::size_t hours = 0;
  double mean_dry_bulb_c = 0.0;
  double mean_wet_bulb_c = 0.0;
  double mean_humidity_ratio = 0.0;
  std::size_t flagged_hours = 0;
};

WeatherSummary summarize(std::span<const WeatherRecord> records);

// Deterministic diurnal series: temperature peaks at 15:00, humidity is
// lowest when temperature peaks.
struct DiurnalClimate {
  double mean_dry_bulb_c = 28.0;
  double dry_bulb_amplitude_c = 4.0;
  double mean_rh_pct = 70.0;
  double rh_amplitude_pct = 12.0;
  double pressure_pa = 101325.0;
};

std::vector<WeatherRecord> synthetic_weather(std::size_t hours, const DiurnalClimate& climate = {});

}  // namespace dcsynth
