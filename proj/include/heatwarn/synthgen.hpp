// Seeded synthetic world: Poisson mortality with seasonal/weekly/holiday
// structure, AR(1) meteorology, synoptic codes, and injected heat events with
// known excess multipliers. The designed multipliers are the ground truth the
// private real-world data cannot provide.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "heatwarn/date.hpp"
#include "heatwarn/decision.hpp"
#include "heatwarn/series.hpp"
#include "heatwarn/synoptic.hpp"

namespace heatwarn {

enum class SscPattern { dry, mixed };

inline const char* to_string(SscPattern p) {
  return p == SscPattern::dry ? "dry" : "mixed";
}

struct SynthEvent {
  CalendarDate start;
  int length = 0;
  double multiplier = 1.0;  // mean deaths scale on event days
  SscPattern pattern = SscPattern::dry;

  CalendarDate end() const { return advance(start, length - 1); }
  double designed_ratio() const { return multiplier - 1.0; }
};

struct WorldParams {
  int start_year = 2000;
  int years = 5;
  std::string region_name = "synthville";

  double base_mortality = std::log(150.0);  // log scale
  double annual_amplitude = 0.12;           // winter-peaking log cosine
  std::array<double, 7> dow_effects{0.010, -0.006, -0.010, 0.000,
                                    0.004, 0.018,  0.014};  // Mon..Sun, log
  double holiday_effect = 0.03;  // log

  double temp_mean = 14.0, temp_amplitude = 10.0, temp_noise_sd = 1.8;
  double pressure_mean = 1013.0, pressure_amplitude = 6.0,
         pressure_noise_sd = 4.0;
  double wind_mean = 3.0, wind_noise_sd = 1.0;
  double humidity_mean = 62.0, humidity_amplitude = 14.0,
         humidity_noise_sd = 6.0;
  double ar1_rho = 0.7;

  double event_temp_boost = 8.0;   // deg C floor on event days
  double event_temp_slope = 15.0;  // extra deg C per unit designed ratio

  std::vector<SynthEvent> events;
  std::uint64_t seed = 0;

  CalendarDate span_start() const { return {start_year, 1, 1}; }
  CalendarDate span_end() const { return {start_year + years - 1, 12, 31}; }

  void validate() const {
    if (years < 1) throw DataError("world must span at least one year");
    if (!(ar1_rho >= 0.0 && ar1_rho < 1.0))
      throw DataError("ar1_rho must be in [0,1)");
    CalendarDate prev_end{};
    bool have_prev = false;
    for (const auto& e : events) {
      if (e.length < 1) throw DataError("event length must be >= 1");
      if (e.multiplier < 1.0)
        throw DataError("event multipliers must be >= 1");
      const CalendarDate en = e.end();
      if (e.start < span_start() || span_end() < en)
        throw DataError("event outside world span");
      if (e.start.year != en.year || e.start.month < 6 || en.month > 9)
        throw DataError("events must fall within June-September of one year");
      if (have_prev && !(prev_end < e.start))
        throw DataError("events must be sorted and non-overlapping");
      prev_end = en;
      have_prev = true;
    }
  }
};

struct WorldTruth {
  CalendarDate start;
  std::vector<double> mu;  // true mean deaths per day
  std::vector<SynthEvent> events;
};

// Level implied by the designed multiplier alone (noise-free scale).
inline HeatwaveLevel truth_level(double multiplier, const AlarmConfig& a = {}) {
  return classify_ratio(multiplier - 1.0, a);
}

inline HeatwaveLevel truth_label(const WorldTruth& truth,
                                 const HeatwaveEvent& ev,
                                 const AlarmConfig& a = {}) {
  for (const auto& e : truth.events)
    if (e.start == ev.start && e.end() == ev.end)
      return truth_level(e.multiplier, a);
  throw DataError("truth_label: no injected event spans " +
                  format_date(ev.start) + ".." + format_date(ev.end));
}

// Fixed national holidays used by the generator (month, day).
inline const std::vector<std::pair<int, int>>& synth_holidays() {
  static const std::vector<std::pair<int, int>> days = {
      {1, 1}, {1, 6}, {5, 1}, {8, 15}, {10, 12},
      {11, 1}, {12, 6}, {12, 8}, {12, 25}};
  return days;
}

namespace detail {

inline SscCode event_code(const SynthEvent& e, int offset) {
  if (e.pattern == SscPattern::dry) return SscCode::DT;
  // mixed: tropical throughout; first/last two days dry-tropical, interior
  // alternating moist/dry so every in-event 3-day window qualifies
  if (offset < 2 || offset >= e.length - 2) return SscCode::DT;
  return (offset - 2) % 2 == 0 ? SscCode::MT : SscCode::DT;
}

}  // namespace detail

inline std::pair<DailySeries, WorldTruth> generate(const WorldParams& p) {
  p.validate();
  const CalendarDate start = p.span_start();
  const std::int64_t n_days = to_days(p.span_end()) - to_days(start) + 1;
  const int n = static_cast<int>(n_days);

  // day -> (event index, offset) map
  std::vector<int> event_of(static_cast<std::size_t>(n), -1);
  std::vector<int> offset_of(static_cast<std::size_t>(n), 0);
  for (std::size_t ei = 0; ei < p.events.size(); ++ei) {
    const auto& e = p.events[ei];
    const int i0 = static_cast<int>(to_days(e.start) - to_days(start));
    for (int k = 0; k < e.length; ++k) {
      event_of[static_cast<std::size_t>(i0 + k)] = static_cast<int>(ei);
      offset_of[static_cast<std::size_t>(i0 + k)] = k;
    }
  }

  HolidayTable holidays;
  for (int y = p.start_year; y < p.start_year + p.years; ++y)
    for (auto [m, d] : synth_holidays()) holidays.insert({y, m, d});

  std::mt19937 rng(static_cast<std::mt19937::result_type>(p.seed));
  std::normal_distribution<double> unit(0.0, 1.0);
  // non-event codes are never tropical, so detected runs are exactly the
  // injected events
  std::discrete_distribution<int> summer_code({0.30, 0.25, 0.15, 0.15, 0.15});
  std::discrete_distribution<int> winter_code({0.15, 0.15, 0.30, 0.25, 0.15});
  static constexpr SscCode kQuiet[5] = {SscCode::DM, SscCode::MM, SscCode::DP,
                                        SscCode::MP, SscCode::OTHER};

  DailySeries series;
  series.region_name = p.region_name;
  series.level = RegionLevel::city;
  series.records.resize(static_cast<std::size_t>(n));
  WorldTruth truth;
  truth.start = start;
  truth.mu.resize(static_cast<std::size_t>(n));
  truth.events = p.events;

  const double two_pi = 2.0 * M_PI;
  double e_temp = 0, e_pres = 0, e_wind = 0, e_hum = 0;
  const double s_temp = p.temp_noise_sd * std::sqrt(1 - p.ar1_rho * p.ar1_rho);
  const double s_pres =
      p.pressure_noise_sd * std::sqrt(1 - p.ar1_rho * p.ar1_rho);
  const double s_wind = p.wind_noise_sd * std::sqrt(1 - p.ar1_rho * p.ar1_rho);
  const double s_hum =
      p.humidity_noise_sd * std::sqrt(1 - p.ar1_rho * p.ar1_rho);

  CalendarDate date = start;
  for (int i = 0; i < n; ++i, date = advance(date, 1)) {
    DailyRecord& rec = series.records[static_cast<std::size_t>(i)];
    rec.date = date;
    rec.holiday = holidays.contains(date);
    const int doy = day_of_year(date);
    const int dow = day_of_week(date);
    const int ei = event_of[static_cast<std::size_t>(i)];

    double log_mu = p.base_mortality +
                    p.annual_amplitude * std::cos(two_pi * (doy - 14) / 365.25) +
                    p.dow_effects[static_cast<std::size_t>(dow - 1)] +
                    (rec.holiday ? p.holiday_effect : 0.0);
    if (ei >= 0) log_mu += std::log(p.events[static_cast<std::size_t>(ei)].multiplier);
    const double mu = std::exp(log_mu);
    truth.mu[static_cast<std::size_t>(i)] = mu;
    std::poisson_distribution<long> pois(mu);
    rec.deaths = pois(rng);

    // fixed draw order: temperature, pressure, wind, humidity
    e_temp = p.ar1_rho * e_temp + s_temp * unit(rng);
    e_pres = p.ar1_rho * e_pres + s_pres * unit(rng);
    e_wind = p.ar1_rho * e_wind + s_wind * unit(rng);
    e_hum = p.ar1_rho * e_hum + s_hum * unit(rng);

    double temp = p.temp_mean +
                  p.temp_amplitude * std::cos(two_pi * (doy - 196) / 365.25) +
                  e_temp;
    double pres = p.pressure_mean +
                  p.pressure_amplitude * std::cos(two_pi * (doy - 20) / 365.25) +
                  e_pres;
    double wind = std::max(0.0, p.wind_mean + e_wind);
    double hum = p.humidity_mean -
                 p.humidity_amplitude * std::cos(two_pi * (doy - 196) / 365.25) +
                 e_hum;

    SscCode code;
    if (ei >= 0) {
      const auto& e = p.events[static_cast<std::size_t>(ei)];
      temp += p.event_temp_boost + p.event_temp_slope * e.designed_ratio();
      code = detail::event_code(e, offset_of[static_cast<std::size_t>(i)]);
      hum += code == SscCode::MT ? 12.0 : -12.0;
    } else {
      const bool summer = doy >= 120 && doy <= 290;
      code = kQuiet[summer ? summer_code(rng) : winter_code(rng)];
    }
    hum = std::min(98.0, std::max(5.0, hum));

    rec.meteo[0] = temp;
    rec.meteo[1] = pres;
    rec.meteo[2] = wind;
    rec.meteo[3] = hum;
    rec.ssc = code;
  }
  return {std::move(series), std::move(truth)};
}

// Canonical 20-year benchmark world: three events per summer, designed excess
// ratios cycling {0.05, 0.25, 0.45}, lengths 7..12, alternating code patterns.
inline WorldParams make_benchmark_params(int years = 20,
                                         std::uint64_t seed = 77) {
  WorldParams p;
  p.years = years;
  p.seed = seed;
  static constexpr int kLengths[6] = {7, 9, 11, 8, 10, 12};
  static constexpr double kMult[3] = {1.05, 1.25, 1.45};
  static constexpr int kStartMonth[3] = {6, 7, 8};
  static constexpr int kStartDay[3] = {8, 10, 14};
  int idx = 0;
  for (int y = 0; y < years; ++y) {
    for (int k = 0; k < 3; ++k, ++idx) {
      SynthEvent e;
      e.start = {p.start_year + y, kStartMonth[k],
                 kStartDay[k] + (y * 7 + k * 3) % 5};
      e.length = kLengths[idx % 6];
      e.multiplier = kMult[idx % 3];
      e.pattern = idx % 2 == 0 ? SscPattern::dry : SscPattern::mixed;
      p.events.push_back(e);
    }
  }
  return p;
}

}  // namespace heatwarn
