// Excess-ratio computation, alarm thresholding, and observed event labeling.
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "heatwarn/date.hpp"
#include "heatwarn/glm.hpp"
#include "heatwarn/series.hpp"
#include "heatwarn/synoptic.hpp"

namespace heatwarn {

struct AlarmConfig {
  double alpha_l1 = 0.15;
  double alpha_l2 = 0.30;

  void validate() const {
    if (!(alpha_l1 > 0.0) || !(alpha_l1 <= alpha_l2))
      throw DataError("alarm thresholds must satisfy 0 < alpha_l1 <= alpha_l2");
  }
};

enum class HeatwaveLevel { L0, L1, L2 };

inline const char* to_string(HeatwaveLevel l) {
  switch (l) {
    case HeatwaveLevel::L0: return "L0";
    case HeatwaveLevel::L1: return "L1";
    case HeatwaveLevel::L2: return "L2";
  }
  return "?";
}

// Strict thresholds: a ratio exactly at a threshold does not reach the level.
inline HeatwaveLevel classify_ratio(double r, const AlarmConfig& a = {}) {
  a.validate();
  if (r > a.alpha_l2) return HeatwaveLevel::L2;
  if (r > a.alpha_l1) return HeatwaveLevel::L1;
  return HeatwaveLevel::L0;
}

inline std::vector<double> excess_ratios(const std::vector<double>& all_cause,
                                         const std::vector<double>& baseline) {
  if (all_cause.size() != baseline.size())
    throw DataError("excess_ratios: length mismatch");
  std::vector<double> r(all_cause.size());
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (!(baseline[i] > 0.0))
      throw DataError("non-positive baseline at day " + std::to_string(i));
    r[i] = (all_cause[i] - baseline[i]) / baseline[i];
  }
  return r;
}

// One forecast evaluation: h days ahead of a single origin.
struct ForecastBundle {
  std::vector<CalendarDate> dates;
  std::vector<double> all_cause;  // forecast X
  std::vector<double> baseline;   // GLM expected X
  std::vector<double> excess;
  std::vector<double> ratios;
};

inline ForecastBundle make_forecast_bundle(std::vector<CalendarDate> dates,
                                           std::vector<double> all_cause,
                                           std::vector<double> baseline) {
  if (dates.size() != all_cause.size() || dates.size() != baseline.size())
    throw DataError("forecast bundle: length mismatch");
  ForecastBundle b;
  b.ratios = excess_ratios(all_cause, baseline);
  b.dates = std::move(dates);
  b.all_cause = std::move(all_cause);
  b.baseline = std::move(baseline);
  b.excess.resize(b.all_cause.size());
  for (std::size_t i = 0; i < b.excess.size(); ++i)
    b.excess[i] = b.all_cause[i] - b.baseline[i];
  return b;
}

// Alarm iff the max forecast excess ratio over the event days inside the
// horizon strictly exceeds alpha.
inline bool decide_alarm(const ForecastBundle& b,
                         const std::vector<CalendarDate>& event_days,
                         double alpha) {
  if (event_days.empty())
    throw DataError("decide_alarm: no event days in horizon");
  double mx = 0.0;
  bool any = false;
  for (const auto& d : event_days) {
    auto it = std::find(b.dates.begin(), b.dates.end(), d);
    if (it == b.dates.end())
      throw DataError("decide_alarm: day " + format_date(d) +
                      " not in forecast bundle");
    const double r = b.ratios[static_cast<std::size_t>(it - b.dates.begin())];
    mx = any ? std::max(mx, r) : r;
    any = true;
  }
  return mx > alpha;
}

struct EventLabel {
  HeatwaveLevel level = HeatwaveLevel::L0;
  double max_ratio = 0.0;  // max over event days of (X - baseline)/baseline
};

// Observed label: max daily excess ratio of recorded deaths over the GLM
// baseline across the event, thresholded into L0/L1/L2.
inline EventLabel label_event(const DailySeries& s, const GlmFit& fit,
                              const HeatwaveEvent& ev,
                              const AlarmConfig& a = {}) {
  a.validate();
  const std::int64_t i0 = s.index_of(ev.start);
  const std::int64_t i1 = s.index_of(ev.end);
  if (i0 < 0 || i1 < 0)
    throw DataError("label_event: event days outside the series span");
  EventLabel out;
  bool first = true;
  for (std::int64_t i = i0; i <= i1; ++i) {
    const DailyRecord& rec = s[static_cast<std::size_t>(i)];
    if (!rec.deaths)
      throw DataError("label_event: missing deaths on " +
                      format_date(rec.date));
    const double base = fit.predict_one(rec.date, rec.holiday);
    if (!(base > 0.0))
      throw DataError("label_event: non-positive baseline on " +
                      format_date(rec.date));
    const double r = (static_cast<double>(*rec.deaths) - base) / base;
    out.max_ratio = first ? r : std::max(out.max_ratio, r);
    first = false;
  }
  out.level = classify_ratio(out.max_ratio, a);
  return out;
}

}  // namespace heatwarn
