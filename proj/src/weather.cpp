#include "dcsynth/weather.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "dcsynth/error.hpp"

namespace dcsynth {

double stull_formula(double t, double rh) {
  return t * std::atan(0.152 * std::sqrt(rh + 8.314)) + std::atan(t + rh) -
         std::atan(rh - 1.676) + 0.00392 * std::pow(rh, 1.5) * std::atan(0.023 * rh) - 4.686;
}

double wet_bulb_stull(double dry_bulb_c, double rh_pct) {
  return std::min(stull_formula(dry_bulb_c, rh_pct), dry_bulb_c);
}

bool in_stull_range(double rh_pct) { return rh_pct >= 5.0 && rh_pct <= 99.0; }

double saturation_vapor_pressure(double t) {
  return 611.21 * std::exp((18.678 - t / 234.5) * (t / (257.14 + t)));
}

double humidity_ratio(double t, double rh, double p) {
  const double pv = rh * saturation_vapor_pressure(t) / 100.0;
  if (pv >= p) {
    throw Error(ErrorKind::Nonphysical, "vapour pressure exceeds atmospheric pressure");
  }
  return 0.622 * pv / (p - pv);
}

ExternalConditions external_conditions(const WeatherRecord& r) {
  ExternalConditions c;
  c.dry_bulb_c = r.dry_bulb_c;
  c.wet_bulb_c = wet_bulb_stull(r.dry_bulb_c, r.rh_pct);
  c.humidity_ratio = humidity_ratio(r.dry_bulb_c, r.rh_pct, r.pressure_pa);
  c.outside_stull_range = !in_stull_range(r.rh_pct);
  return c;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no, std::string_view column) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || cell.empty() || !std::isfinite(v)) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": cannot parse " +
                                      std::string(column) + " value '" + cell + "'");
  }
  return v;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

std::vector<WeatherRecord> parse_weather_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorKind::Parse, "weather CSV is empty");

  constexpr std::array<std::string_view, 4> kColumns = {"hour", "dry_bulb_c", "rh_pct", "pressure_pa"};
  std::array<std::size_t, 4> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw Error(ErrorKind::Parse, "weather CSV missing column '" + std::string(kColumns[c]) + "'");
    }
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<WeatherRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < header.size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " columns");
    }
    WeatherRecord r;
    const double hour = parse_number(cells[index[0]], line_no, kColumns[0]);
    if (hour != std::floor(hour) || hour < 0) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": hour must be a non-negative integer");
    }
    r.hour = static_cast<int>(hour);
    r.dry_bulb_c = parse_number(cells[index[1]], line_no, kColumns[1]);
    r.rh_pct = parse_number(cells[index[2]], line_no, kColumns[2]);
    r.pressure_pa = parse_number(cells[index[3]], line_no, kColumns[3]);
    if (r.rh_pct < 0.0 || r.rh_pct > 100.0) {
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": rh_pct " +
                                             format_double(r.rh_pct) + " outside [0, 100]");
    }
    if (!(r.pressure_pa > 0.0)) {
      throw Error(ErrorKind::Validation,
                  "line " + std::to_string(line_no) + ": pressure_pa must be > 0");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<WeatherRecord> load_weather_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open weather file '" + path.string() + "'");
  return parse_weather_csv(in);
}

void write_weather_csv(std::span<const WeatherRecord> records, std::ostream& out) {
  out << "hour,dry_bulb_c,rh_pct,pressure_pa\n";
  for (const auto& r : records) {
    out << r.hour << ',' << format_double(r.dry_bulb_c) << ',' << format_double(r.rh_pct) << ','
        << format_double(r.pressure_pa) << '\n';
  }
}

WeatherSummary summarize(std::span<const WeatherRecord> records) {
  if (records.empty()) throw Error(ErrorKind::Parse, "weather series is empty");
  WeatherSummary s;
  s.hours = records.size();
  for (const auto& r : records) {
    const ExternalConditions c = external_conditions(r);
    s.mean_dry_bulb_c += r.dry_bulb_c;
    s.mean_wet_bulb_c += c.wet_bulb_c;
    s.mean_humidity_ratio += c.humidity_ratio;
    if (c.outside_stull_range) ++s.flagged_hours;
  }
  const double n = static_cast<double>(records.size());
  s.mean_dry_bulb_c /= n;
  s.mean_wet_bulb_c /= n;
  s.mean_humidity_ratio /= n;
  return s;
}

std::vector<WeatherRecord> synthetic_weather(std::size_t hours, const DiurnalClimate& climate) {
  std::vector<WeatherRecord> out;
  out.reserve(hours);
  for (std::size_t h = 0; h < hours; ++h) {
    const double phase = 2.0 * std::numbers::pi * (static_cast<double>(h % 24) - 9.0) / 24.0;
    const double wave = std::sin(phase);
    WeatherRecord r;
    r.hour = static_cast<int>(h);
    r.dry_bulb_c = climate.mean_dry_bulb_c + climate.dry_bulb_amplitude_c * wave;
    r.rh_pct = std::clamp(climate.mean_rh_pct - climate.rh_amplitude_pct * wave, 0.0, 100.0);
    r.pressure_pa = climate.pressure_pa;
    out.push_back(r);
  }
  return out;
}

}  // namespace dcsynth
