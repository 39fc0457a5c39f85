// Rolling real-time evaluation: from the third calendar year onward, the
// forecaster carries weights forward year to year (fresh in the first
// evaluation year), the baseline GLM is refit from scratch on the two prior
// years, and every detected event is forecast from the day before it starts
// plus daily re-forecasts while it outruns the horizon.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "heatwarn/decision.hpp"
#include "heatwarn/glm.hpp"
#include "heatwarn/metrics.hpp"
#include "heatwarn/series.hpp"
#include "heatwarn/synoptic.hpp"
#include "heatwarn/transformer.hpp"

namespace heatwarn {

enum class AccessPhase { setup, training, forecasting, scoring };

inline const char* to_string(AccessPhase p) {
  switch (p) {
    case AccessPhase::setup: return "setup";
    case AccessPhase::training: return "training";
    case AccessPhase::forecasting: return "forecasting";
    case AccessPhase::scoring: return "scoring";
  }
  return "?";
}

// Read bounds for the current protocol phase. Limits are exclusive day
// indices; -1 means unrestricted. Calendar fields (date, holiday) are never
// restricted: they are deterministic covariates, not observations.
struct PhaseInfo {
  AccessPhase phase = AccessPhase::setup;
  int year = 0;        // evaluation year being processed
  int origin = -1;     // forecast origin day index (forecasting phase)
  std::int64_t mort_meteo_limit = -1;
  std::int64_t ssc_limit = -1;
};

// Customization hook: instrumented sources overload this via ADL to learn
// the active phase and its read bounds. The default is a no-op.
template <typename S>
inline void notify_phase(const S&, const PhaseInfo&) {}

// Dense numeric view over a fully imputed series. Construction fails on any
// missing value so the protocol never has to reason about gaps.
class EvalSource {
 public:
  explicit EvalSource(const DailySeries& s) {
    if (s.records.empty()) throw DataError("empty series");
    s.check_dense();
    const std::size_t n = s.size();
    start_ = s.start_date();
    mort_.reserve(n);
    for (auto& ch : met_) ch.reserve(n);
    ssc_.reserve(n);
    holiday_.reserve(n);
    for (const auto& r : s.records) {
      if (!r.deaths)
        throw DataError("missing deaths on " + format_date(r.date) +
                        " (impute first)");
      if (!r.ssc)
        throw DataError("missing SSC code on " + format_date(r.date));
      mort_.push_back(*r.deaths);
      for (int ch = 0; ch < kMeteoDims; ++ch) {
        if (!r.meteo[static_cast<std::size_t>(ch)])
          throw DataError("missing meteorology on " + format_date(r.date) +
                          " (impute first)");
        met_[static_cast<std::size_t>(ch)].push_back(
            *r.meteo[static_cast<std::size_t>(ch)]);
      }
      ssc_.push_back(*r.ssc);
      holiday_.push_back(r.holiday ? 1 : 0);
    }
  }

  int size() const { return static_cast<int>(mort_.size()); }
  CalendarDate date(int t) const {
    return from_days(to_days(start_) + t);
  }
  bool holiday(int t) const {
    return holiday_[static_cast<std::size_t>(t)] != 0;
  }
  double mortality(int t) const { return mort_[static_cast<std::size_t>(t)]; }
  double meteo(int ch, int t) const {
    return met_[static_cast<std::size_t>(ch)][static_cast<std::size_t>(t)];
  }
  SscCode ssc(int t) const { return ssc_[static_cast<std::size_t>(t)]; }

 private:
  CalendarDate start_;
  std::vector<double> mort_;
  std::array<std::vector<double>, kMeteoDims> met_;
  std::vector<SscCode> ssc_;
  std::vector<char> holiday_;
};

// Instrumented data layer: forwards to EvalSource while checking every
// observation read against the active phase bounds. Violations are recorded,
// not thrown, so an audit run reports all of them at once.
class AuditedSource {
 public:
  struct Counters {
    std::int64_t mort_reads = 0, meteo_reads = 0, ssc_reads = 0;
    std::int64_t training_reads = 0, forecast_reads = 0;
  };

  explicit AuditedSource(const DailySeries& s) : inner_(s) {}

  int size() const { return inner_.size(); }
  CalendarDate date(int t) const { return inner_.date(t); }
  bool holiday(int t) const { return inner_.holiday(t); }

  double mortality(int t) const {
    ++counters_.mort_reads;
    check(t, phase_.mort_meteo_limit, "mortality");
    return inner_.mortality(t);
  }
  double meteo(int ch, int t) const {
    ++counters_.meteo_reads;
    check(t, phase_.mort_meteo_limit, "meteo");
    return inner_.meteo(ch, t);
  }
  SscCode ssc(int t) const {
    ++counters_.ssc_reads;
    check(t, phase_.ssc_limit, "ssc");
    return inner_.ssc(t);
  }

  void set_phase(const PhaseInfo& p) const { phase_ = p; }
  const PhaseInfo& phase() const { return phase_; }
  const std::vector<std::string>& violations() const { return violations_; }
  const Counters& counters() const { return counters_; }

 private:
  void check(int t, std::int64_t limit, const char* what) const {
    if (phase_.phase == AccessPhase::training) ++counters_.training_reads;
    if (phase_.phase == AccessPhase::forecasting) ++counters_.forecast_reads;
    if (limit >= 0 && t >= limit) {
      violations_.push_back(std::string(to_string(phase_.phase)) + " read " +
                            what + "[" + std::to_string(t) + "] >= limit " +
                            std::to_string(limit) + " (year " +
                            std::to_string(phase_.year) + ", origin " +
                            std::to_string(phase_.origin) + ")");
    }
  }

  EvalSource inner_;
  mutable PhaseInfo phase_;
  mutable Counters counters_;
  mutable std::vector<std::string> violations_;
};

inline void notify_phase(const AuditedSource& s, const PhaseInfo& p) {
  s.set_phase(p);
}

struct EventOutcome {
  HeatwaveEvent event;
  int year = 0;
  HeatwaveLevel label = HeatwaveLevel::L0;  // observed, via that year's GLM
  double observed_ratio = 0.0;
  double max_forecast_ratio = 0.0;
  int origins_evaluated = 0;
  bool alarm_l1 = false, alarm_l2 = false;
};

namespace detail {

// Detected events grouped with their series indices.
struct IndexedEvent {
  HeatwaveEvent event;
  int start = 0, end = 0;  // day indices
};

template <typename Source>
std::vector<IndexedEvent> detect_indexed(const Source& src) {
  std::vector<SscCode> codes(static_cast<std::size_t>(src.size()));
  for (int t = 0; t < src.size(); ++t)
    codes[static_cast<std::size_t>(t)] = src.ssc(t);
  std::vector<IndexedEvent> out;
  for (auto [a, b] : detect_runs(codes)) {
    IndexedEvent e;
    e.start = static_cast<int>(a);
    e.end = static_cast<int>(b);
    e.event = HeatwaveEvent{src.date(e.start), src.date(e.end),
                            e.end - e.start + 1};
    out.push_back(e);
  }
  return out;
}

}  // namespace detail

// Forecast origins for an event [s, e]: the day before it starts, then every
// day t while the remaining event extends past t's horizon (t <= e - h).
inline std::vector<int> forecast_origins(int start, int end, int horizon) {
  std::vector<int> t;
  t.push_back(start - 1);
  for (int o = start; o <= end - horizon; ++o) t.push_back(o);
  return t;
}

template <typename Real = float, typename Source>
std::vector<EventOutcome> run_rolling(const Source& src,
                                      const TransformerConfig& tcfg,
                                      const GlmDesignConfig& gcfg,
                                      const AlarmConfig& acfg,
                                      std::vector<std::string>* warnings = nullptr,
                                      Transformer<Real>* model_out = nullptr,
                                      AdamState<Real>* opt_out = nullptr,
                                      GlmFit* glm_out = nullptr) {
  acfg.validate();
  tcfg.validate();
  const int n = src.size();
  if (n == 0) throw DataError("empty series");
  const int first_year = src.date(0).year;
  const int last_year = src.date(n - 1).year;
  if (last_year - first_year < 2)
    throw DataError("rolling evaluation needs at least 3 calendar years");

  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  auto index_of_year_start = [&](int year) {
    const std::int64_t i = to_days(CalendarDate{year, 1, 1}) -
                           to_days(src.date(0));
    return static_cast<int>(std::max<std::int64_t>(i, 0));
  };

  // Event extents are protocol bookkeeping resolved up front from the given
  // code panel; model inputs stay bounded per phase below. No mortality or
  // meteorology may be read here.
  notify_phase(src, PhaseInfo{AccessPhase::setup, 0, -1, 0, -1});
  const auto events = detail::detect_indexed(src);

  Transformer<Real> model(tcfg);
  std::vector<EventOutcome> outcomes;

  for (int year = first_year + 2; year <= last_year; ++year) {
    const int train_limit = index_of_year_start(year);  // exclusive

    // transformer: all data before the year; fresh in the first evaluation
    // year, carried weights afterwards
    notify_phase(src, PhaseInfo{AccessPhase::training, year, -1, train_limit,
                                train_limit});
    const int last_origin = train_limit - 1 - tcfg.horizon;
    if (last_origin < tcfg.window)
      throw DataError("not enough history to train before year " +
                      std::to_string(year));
    const auto samples = build_samples<Real>(src, tcfg.window, last_origin, tcfg);
    model.train(samples, opt_out);

    // baseline GLM: refit from scratch on the two preceding years
    const int glm_lo = index_of_year_start(year - 2);
    std::vector<std::vector<double>> designs;
    std::vector<double> counts;
    designs.reserve(static_cast<std::size_t>(train_limit - glm_lo));
    counts.reserve(static_cast<std::size_t>(train_limit - glm_lo));
    for (int t = glm_lo; t < train_limit; ++t) {
      designs.push_back(build_design(src.date(t), src.holiday(t), gcfg));
      counts.push_back(src.mortality(t));
    }
    GlmFit glm = fit_irls(designs, counts, 100, 1e-8, gcfg);
    glm.train_start = src.date(glm_lo);
    glm.train_end = src.date(train_limit - 1);

    for (const auto& ev : events) {
      if (src.date(ev.start).year != year) continue;

      EventOutcome out;
      out.event = ev.event;
      out.year = year;
      double best = 0.0;
      bool any = false;
      for (int t : forecast_origins(ev.start, ev.end, tcfg.horizon)) {
        if (t < tcfg.window) {
          warn("skipping origin " + std::to_string(t) + " of event " +
               format_date(ev.event.start) + ": fewer than " +
               std::to_string(tcfg.window) + " days of history");
          continue;
        }
        if (t + tcfg.horizon >= n) {
          warn("skipping origin " + std::to_string(t) + " of event " +
               format_date(ev.event.start) + ": horizon leaves the series");
          continue;
        }
        notify_phase(src, PhaseInfo{AccessPhase::forecasting, year, t, t + 1,
                                    t + tcfg.horizon + 1});
        const auto forecast = predict_horizon(model, src, t);
        const int d_lo = t + 1;
        const int d_hi = std::min(ev.end, t + tcfg.horizon);
        for (int d = d_lo; d <= d_hi; ++d) {
          const double base = glm.predict_one(src.date(d), src.holiday(d));
          if (!(base > 0.0))
            throw DataError("non-positive baseline on " +
                            format_date(src.date(d)));
          const double r =
              (forecast[static_cast<std::size_t>(d - t - 1)] - base) / base;
          best = any ? std::max(best, r) : r;
          any = true;
        }
        ++out.origins_evaluated;
      }
      if (!any) {
        warn("event " + format_date(ev.event.start) +
             " has no usable forecast origin; skipped");
        continue;
      }
      out.max_forecast_ratio = best;
      out.alarm_l1 = best > acfg.alpha_l1;
      out.alarm_l2 = best > acfg.alpha_l2;

      // observed label, settled once the event has ended
      notify_phase(src,
                   PhaseInfo{AccessPhase::scoring, year, -1, ev.end + 1, -1});
      double obs = 0.0;
      bool first = true;
      for (int d = ev.start; d <= ev.end; ++d) {
        const double base = glm.predict_one(src.date(d), src.holiday(d));
        if (!(base > 0.0))
          throw DataError("non-positive baseline on " +
                          format_date(src.date(d)));
        const double r = (src.mortality(d) - base) / base;
        obs = first ? r : std::max(obs, r);
        first = false;
      }
      out.observed_ratio = obs;
      out.label = classify_ratio(obs, acfg);
      outcomes.push_back(out);
    }

    if (year == last_year) {
      if (model_out) *model_out = model;
      if (glm_out) *glm_out = glm;
    }
  }
  return outcomes;
}

// Confusion counts of event alarms against observed labels for one task
// (level 1: label reaches L1; level 2: label reaches L2).
inline ConfusionCounts score_events(const std::vector<EventOutcome>& outs,
                                    bool level2_task) {
  ConfusionCounts c;
  for (const auto& o : outs) {
    const bool actual = level2_task ? o.label == HeatwaveLevel::L2
                                    : o.label != HeatwaveLevel::L0;
    const bool predicted = level2_task ? o.alarm_l2 : o.alarm_l1;
    if (actual)
      (predicted ? c.tp : c.fn)++;
    else
      (predicted ? c.fp : c.tn)++;
  }
  return c;
}

inline std::vector<SweepInput> sweep_inputs(
    const std::vector<EventOutcome>& outs, bool level2_task) {
  std::vector<SweepInput> in;
  in.reserve(outs.size());
  for (const auto& o : outs) {
    const bool actual = level2_task ? o.label == HeatwaveLevel::L2
                                    : o.label != HeatwaveLevel::L0;
    in.push_back({o.max_forecast_ratio, actual});
  }
  return in;
}

}  // namespace heatwarn
