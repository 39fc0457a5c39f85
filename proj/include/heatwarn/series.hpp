// Daily time-series model: records, imputation, scaling, normalization.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "heatwarn/date.hpp"

namespace heatwarn {

enum class SscCode { DP, DM, DT, MP, MM, MT, OTHER };

inline const char* to_string(SscCode c) {
  switch (c) {
    case SscCode::DP: return "DP";
    case SscCode::DM: return "DM";
    case SscCode::DT: return "DT";
    case SscCode::MP: return "MP";
    case SscCode::MM: return "MM";
    case SscCode::MT: return "MT";
    case SscCode::OTHER: return "OTHER";
  }
  return "?";
}

inline SscCode parse_ssc(std::string_view s) {
  if (s == "DP") return SscCode::DP;
  if (s == "DM") return SscCode::DM;
  if (s == "DT") return SscCode::DT;
  if (s == "MP") return SscCode::MP;
  if (s == "MM") return SscCode::MM;
  if (s == "MT") return SscCode::MT;
  if (s == "OTHER") return SscCode::OTHER;
  throw DataError("unknown SSC token '" + std::string(s) + "'");
}

constexpr int kMeteoDims = 4;  // temp_c, pressure_hpa, wind_ms, humidity_pct

struct DailyRecord {
  CalendarDate date;
  std::optional<double> deaths;
  std::array<std::optional<double>, kMeteoDims> meteo;
  bool holiday = false;
  std::optional<SscCode> ssc;
};

enum class RegionLevel { city, province };

// Dense daily series: one record per day, consecutive dates, no absent rows.
struct DailySeries {
  std::string region_name;
  RegionLevel level = RegionLevel::city;
  std::vector<DailyRecord> records;

  std::size_t size() const { return records.size(); }
  const DailyRecord& operator[](std::size_t i) const { return records[i]; }
  DailyRecord& operator[](std::size_t i) { return records[i]; }

  CalendarDate start_date() const { return records.front().date; }
  CalendarDate end_date() const { return records.back().date; }

  // Index of a date within the series, or -1 if outside the span.
  std::int64_t index_of(const CalendarDate& d) const {
    if (records.empty()) return -1;
    std::int64_t i = to_days(d) - to_days(records.front().date);
    return (i >= 0 && i < static_cast<std::int64_t>(records.size())) ? i : -1;
  }

  void check_dense() const {
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (to_days(records[i].date) != to_days(records[i - 1].date) + 1)
        throw DataError("series not dense at " + format_date(records[i].date));
    }
  }
};

// Replace each missing death count by the mean (rounded, ties up) of that
// calendar month's observed deaths over all strictly earlier years.
inline DailySeries impute_mortality(DailySeries series) {
  for (std::size_t i = 0; i < series.records.size(); ++i) {
    auto& rec = series.records[i];
    if (rec.deaths) continue;
    double sum = 0;
    std::size_t n = 0;
    for (const auto& prior : series.records) {
      if (prior.date.year >= rec.date.year) break;
      if (prior.date.month == rec.date.month && prior.deaths) {
        sum += *prior.deaths;
        ++n;
      }
    }
    if (n == 0)
      throw DataError("cannot impute mortality on " + format_date(rec.date) +
                      ": no prior-year data for month " +
                      std::to_string(rec.date.month));
    rec.deaths = std::floor(sum / n + 0.5);
  }
  return series;
}

// Replace each missing meteo value by the mean of all non-missing values of
// that dimension strictly before it.
inline DailySeries impute_meteo(DailySeries series) {
  std::array<double, kMeteoDims> sum{};
  std::array<std::size_t, kMeteoDims> n{};
  for (auto& rec : series.records) {
    for (int k = 0; k < kMeteoDims; ++k) {
      if (!rec.meteo[k]) {
        if (n[k] == 0)
          throw DataError("cannot impute meteo dimension " + std::to_string(k) +
                          " on " + format_date(rec.date) +
                          ": no preceding data");
        rec.meteo[k] = sum[k] / n[k];
      }
      sum[k] += *rec.meteo[k];
      ++n[k];
    }
  }
  return series;
}

// Divide provincial death counts by 100; city series pass through untouched.
// The bool reports whether scaling was applied, so callers can warn on the
// city-level no-op.
inline std::pair<DailySeries, bool> scale_provincial(DailySeries series) {
  if (series.level != RegionLevel::province) return {std::move(series), false};
  for (auto& rec : series.records)
    if (rec.deaths) rec.deaths = *rec.deaths / 100.0;
  return {std::move(series), true};
}

// Prefix min-max normalization: value at 0-based index t scaled by the
// envelope [min over j<t, max over j<=t]. Degenerate envelopes map to 0.5.
// Needs at least one strictly earlier value, so t >= 1.
template <typename Real = double>
struct PrefixEnvelope {
  Real min_before;  // min over j < t
  Real max_upto;    // max over j <= t

  Real normalize(Real x) const {
    Real den = max_upto - min_before;
    if (den == Real(0)) return Real(0.5);
    return (x - min_before) / den;
  }
  Real denormalize(Real z) const {
    Real den = max_upto - min_before;
    if (den == Real(0)) return min_before;  // constant history
    return z * den + min_before;
  }
};

template <typename Real = double, typename Seq>
PrefixEnvelope<Real> prefix_envelope(const Seq& history, std::size_t t) {
  if (t < 1 || t >= std::size(history))
    throw DataError("normalization index out of range");
  Real mn = static_cast<Real>(history[0]);
  for (std::size_t j = 1; j < t; ++j)
    mn = std::min(mn, static_cast<Real>(history[j]));
  Real mx = mn;
  for (std::size_t j = 0; j <= t; ++j)
    mx = std::max(mx, static_cast<Real>(history[j]));
  return {mn, mx};
}

template <typename Seq>
double normalize_minmax(const Seq& history, std::size_t t) {
  return prefix_envelope<double>(history, t)
      .normalize(static_cast<double>(history[t]));
}

}  // namespace heatwarn
