#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "heatwarn/rolling.hpp"
#include "heatwarn/synthgen.hpp"

using namespace heatwarn;

namespace {

TransformerConfig tiny_forecaster(int epochs = 2) {
  TransformerConfig cfg;
  cfg.window = 6;
  cfg.horizon = 3;
  cfg.d_model = 8;
  cfg.n_heads = 2;
  cfg.mlp_hidden = 8;
  cfg.n_blocks = 1;
  cfg.batch_size = 32;
  cfg.epochs = epochs;
  cfg.seed = 5;
  return cfg;
}

DailySeries flat_series(CalendarDate first, CalendarDate last) {
  DailySeries s;
  for (std::int64_t d = to_days(first); d <= to_days(last); ++d) {
    DailyRecord r;
    r.date = from_days(d);
    r.deaths = 100.0;
    r.meteo = {20.0, 1010.0, 3.0, 60.0};
    r.ssc = SscCode::MM;
    s.records.push_back(r);
  }
  return s;
}

void mark_event(DailySeries& s, CalendarDate start, int len) {
  const auto i0 = s.index_of(start);
  for (int k = 0; k < len; ++k)
    s.records[static_cast<std::size_t>(i0 + k)].ssc = SscCode::DT;
}

}  // namespace

TEST(Rolling, ForecastOriginArithmetic) {
  // length 8, horizon 5: day before the start plus three in-event days
  EXPECT_EQ(forecast_origins(100, 107, 5),
            (std::vector<int>{99, 100, 101, 102}));
  // event no longer than the horizon: only the day before
  EXPECT_EQ(forecast_origins(50, 52, 5), (std::vector<int>{49}));
  EXPECT_EQ(forecast_origins(10, 14, 5), (std::vector<int>{9}));
  EXPECT_EQ(forecast_origins(10, 15, 5), (std::vector<int>{9, 10}));
}

TEST(Rolling, EvalSourceRequiresDenseInputs) {
  auto s = flat_series({2000, 1, 1}, {2000, 1, 10});
  const EvalSource src(s);
  EXPECT_EQ(src.size(), 10);
  EXPECT_EQ(src.date(0), (CalendarDate{2000, 1, 1}));
  EXPECT_EQ(src.date(9), (CalendarDate{2000, 1, 10}));
  EXPECT_EQ(src.mortality(3), 100.0);
  EXPECT_EQ(src.meteo(1, 0), 1010.0);
  EXPECT_EQ(src.ssc(5), SscCode::MM);
  EXPECT_FALSE(src.holiday(0));

  auto missing_deaths = s;
  missing_deaths.records[4].deaths.reset();
  EXPECT_THROW(EvalSource{missing_deaths}, DataError);
  auto missing_met = s;
  missing_met.records[2].meteo[3].reset();
  EXPECT_THROW(EvalSource{missing_met}, DataError);
  auto missing_ssc = s;
  missing_ssc.records[9].ssc.reset();
  EXPECT_THROW(EvalSource{missing_ssc}, DataError);
  auto gap = s;
  gap.records.erase(gap.records.begin() + 5);
  EXPECT_THROW(EvalSource{gap}, DataError);
  EXPECT_THROW(EvalSource{DailySeries{}}, DataError);
}

TEST(Rolling, AuditedSourceEnforcesPhaseBounds) {
  const auto s = flat_series({2000, 1, 1}, {2000, 1, 10});
  const AuditedSource src(s);

  notify_phase(src, PhaseInfo{AccessPhase::training, 2002, -1, 5, 3});
  EXPECT_EQ(src.phase().phase, AccessPhase::training);
  src.mortality(4);
  src.mortality(5);  // violation: at the limit
  src.meteo(0, 7);   // violation
  src.ssc(2);
  src.ssc(3);  // violation
  ASSERT_EQ(src.violations().size(), 3u);
  EXPECT_NE(src.violations()[0].find("training read mortality[5]"),
            std::string::npos);
  EXPECT_NE(src.violations()[1].find("meteo[7]"), std::string::npos);
  EXPECT_NE(src.violations()[2].find("ssc[3]"), std::string::npos);
  EXPECT_EQ(src.counters().mort_reads, 2);
  EXPECT_EQ(src.counters().meteo_reads, 1);
  EXPECT_EQ(src.counters().ssc_reads, 2);
  EXPECT_EQ(src.counters().training_reads, 5);

  // unrestricted phase records nothing new
  notify_phase(src, PhaseInfo{AccessPhase::scoring, 2002, -1, -1, -1});
  src.mortality(9);
  EXPECT_EQ(src.violations().size(), 3u);
}

TEST(Rolling, NeedsThreeCalendarYears) {
  const auto [series, truth] = generate([] {
    WorldParams p;
    p.years = 2;
    p.seed = 3;
    return p;
  }());
  const EvalSource src(series);
  EXPECT_THROW(run_rolling(src, tiny_forecaster(), GlmDesignConfig{},
                           AlarmConfig{}),
               DataError);
}

TEST(Rolling, NoEventsMeansNoOutcomes) {
  WorldParams p;
  p.years = 3;
  p.seed = 8;
  const auto [series, truth] = generate(p);
  const EvalSource src(series);
  std::vector<std::string> warnings;
  const auto outcomes = run_rolling(src, tiny_forecaster(1), GlmDesignConfig{},
                                    AlarmConfig{}, &warnings);
  EXPECT_TRUE(outcomes.empty());
  EXPECT_TRUE(warnings.empty());
}

TEST(Rolling, OutcomesCoverEvalYearEventsOnly) {
  WorldParams p;
  p.years = 5;
  p.seed = 60;
  p.events = {{{2000, 7, 1}, 5, 1.45, SscPattern::dry},     // before eval
              {{2002, 6, 10}, 9, 1.45, SscPattern::mixed},  // eval years
              {{2002, 8, 1}, 4, 1.05, SscPattern::dry},
              {{2003, 7, 15}, 6, 1.25, SscPattern::dry},
              {{2004, 6, 20}, 8, 1.45, SscPattern::mixed},
              {{2004, 9, 1}, 3, 1.05, SscPattern::dry}};
  const auto [series, truth] = generate(p);
  const EvalSource src(series);
  const auto tcfg = tiny_forecaster();
  std::vector<std::string> warnings;
  const auto outcomes =
      run_rolling(src, tcfg, GlmDesignConfig{}, AlarmConfig{}, &warnings);

  ASSERT_EQ(outcomes.size(), 5u);  // the 2000 event is never forecast
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const auto& e = p.events[i + 1];
    EXPECT_EQ(o.event.start, e.start);
    EXPECT_EQ(o.event.end, e.end());
    EXPECT_EQ(o.year, e.start.year);
    const int s = static_cast<int>(series.index_of(e.start));
    EXPECT_EQ(o.origins_evaluated,
              static_cast<int>(
                  forecast_origins(s, s + e.length - 1, tcfg.horizon).size()));
    EXPECT_EQ(o.alarm_l1, o.max_forecast_ratio > 0.15);
    EXPECT_EQ(o.alarm_l2, o.max_forecast_ratio > 0.30);
    EXPECT_EQ(o.label, classify_ratio(o.observed_ratio));
  }
  EXPECT_TRUE(warnings.empty());
}

TEST(Rolling, DeterministicAcrossRuns) {
  WorldParams p;
  p.years = 3;
  p.seed = 21;
  p.events = {{{2002, 7, 5}, 7, 1.35, SscPattern::dry}};
  const auto [series, truth] = generate(p);
  const EvalSource src(series);
  const auto tcfg = tiny_forecaster();

  Transformer<float> m1(tcfg), m2(tcfg);
  AdamState<float> o1, o2;
  GlmFit g1, g2;
  const auto a = run_rolling(src, tcfg, GlmDesignConfig{}, AlarmConfig{},
                             nullptr, &m1, &o1, &g1);
  const auto b = run_rolling(src, tcfg, GlmDesignConfig{}, AlarmConfig{},
                             nullptr, &m2, &o2, &g2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].event, b[i].event);
    EXPECT_EQ(a[i].max_forecast_ratio, b[i].max_forecast_ratio);
    EXPECT_EQ(a[i].observed_ratio, b[i].observed_ratio);
    EXPECT_EQ(a[i].label, b[i].label);
    EXPECT_EQ(a[i].alarm_l1, b[i].alarm_l1);
    EXPECT_EQ(a[i].alarm_l2, b[i].alarm_l2);
  }
  EXPECT_EQ(m1.params(), m2.params());
  EXPECT_EQ(o1.m, o2.m);
  EXPECT_EQ(g1.beta, g2.beta);
}

TEST(Rolling, EventAtSeriesEndIsSkippedWithWarning) {
  // horizon target days would leave the series: the sole origin is unusable
  auto s = flat_series({2000, 1, 1}, {2002, 6, 30});
  mark_event(s, {2002, 6, 10}, 9);   // usable mid-year event
  mark_event(s, {2002, 6, 28}, 3);   // ends on the final series day
  const EvalSource src(s);
  auto tcfg = tiny_forecaster(1);
  tcfg.horizon = 5;  // the terminal event's one origin overshoots the series
  std::vector<std::string> warnings;
  const auto outcomes = run_rolling(src, tcfg, GlmDesignConfig{},
                                    AlarmConfig{}, &warnings);
  ASSERT_EQ(outcomes.size(), 1u);
  EXPECT_EQ(outcomes[0].event.start, (CalendarDate{2002, 6, 10}));
  EXPECT_EQ(outcomes[0].origins_evaluated, 5);
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_NE(warnings[0].find("horizon leaves the series"), std::string::npos);
  EXPECT_NE(warnings[1].find("no usable forecast origin"), std::string::npos);
}

TEST(Rolling, InsufficientTrainingHistoryThrows) {
  // an oversized window leaves no room for one full training sample
  auto s = flat_series({2000, 12, 30}, {2002, 12, 31});
  mark_event(s, {2002, 7, 1}, 5);
  const EvalSource src(s);
  auto tcfg = tiny_forecaster(1);
  tcfg.window = 400;
  EXPECT_THROW(
      run_rolling(src, tcfg, GlmDesignConfig{}, AlarmConfig{}),
      DataError);
}

TEST(Rolling, AuditRunsCleanOnSynthWorld) {
  WorldParams p;
  p.years = 4;
  p.seed = 33;
  p.events = {{{2002, 7, 1}, 7, 1.45, SscPattern::dry},
              {{2003, 6, 12}, 9, 1.25, SscPattern::mixed},
              {{2003, 8, 20}, 5, 1.45, SscPattern::dry}};
  const auto [series, truth] = generate(p);
  const AuditedSource src(series);
  std::vector<std::string> warnings;
  const auto outcomes = run_rolling(src, tiny_forecaster(), GlmDesignConfig{},
                                    AlarmConfig{}, &warnings);
  EXPECT_EQ(outcomes.size(), 3u);
  EXPECT_TRUE(src.violations().empty())
      << src.violations().size() << " violations, first: "
      << src.violations().front();
  EXPECT_GT(src.counters().training_reads, 0);
  EXPECT_GT(src.counters().forecast_reads, 0);
  EXPECT_GT(src.counters().mort_reads, 0);
  EXPECT_GT(src.counters().ssc_reads, 0);
}

TEST(Rolling, ScannerConfirmsEveryForecastDecision) {
  // the offline event extents used by the runner are recoverable in real
  // time: an online scan of codes through origin+horizon confirms the event
  // start and every in-horizon event day the runner scores
  WorldParams p;
  p.years = 4;
  p.seed = 99;
  p.events = {{{2002, 6, 10}, 9, 1.45, SscPattern::mixed},
              {{2002, 8, 1}, 3, 1.25, SscPattern::dry},
              {{2003, 7, 15}, 12, 1.45, SscPattern::mixed},
              {{2003, 9, 2}, 4, 1.05, SscPattern::dry}};
  const auto [series, truth] = generate(p);
  std::vector<SscCode> codes;
  for (const auto& r : series.records) codes.push_back(*r.ssc);
  const int h = 5;

  for (const auto& e : p.events) {
    const int s = static_cast<int>(series.index_of(e.start));
    const int end = s + e.length - 1;
    for (int t : forecast_origins(s, end, h)) {
      OnlineEventScanner scan;
      const int fed_through = std::min<int>(t + h, static_cast<int>(codes.size()) - 1);
      for (int i = 0; i <= fed_through; ++i)
        scan.push(codes[static_cast<std::size_t>(i)]);
      EXPECT_TRUE(scan.confirmed(static_cast<std::size_t>(s)))
          << "start " << s << " origin " << t;
      for (int d = std::max(s, t + 1); d <= std::min(end, t + h); ++d)
        EXPECT_TRUE(scan.confirmed(static_cast<std::size_t>(d)))
            << "day " << d << " origin " << t;
    }
  }
}

TEST(Rolling, ScoreEventsAndSweepInputs) {
  std::vector<EventOutcome> outs(5);
  const HeatwaveLevel labels[5] = {HeatwaveLevel::L2, HeatwaveLevel::L1,
                                   HeatwaveLevel::L1, HeatwaveLevel::L0,
                                   HeatwaveLevel::L0};
  const bool a1[5] = {true, true, false, true, false};
  const bool a2[5] = {true, false, false, true, false};
  const double ratios[5] = {0.41, 0.22, 0.12, 0.33, 0.05};
  for (int i = 0; i < 5; ++i) {
    outs[static_cast<std::size_t>(i)].label = labels[i];
    outs[static_cast<std::size_t>(i)].alarm_l1 = a1[i];
    outs[static_cast<std::size_t>(i)].alarm_l2 = a2[i];
    outs[static_cast<std::size_t>(i)].max_forecast_ratio = ratios[i];
  }
  const auto c1 = score_events(outs, false);
  EXPECT_EQ(c1.tp, 2);
  EXPECT_EQ(c1.fn, 1);
  EXPECT_EQ(c1.fp, 1);
  EXPECT_EQ(c1.tn, 1);
  const auto c2 = score_events(outs, true);
  EXPECT_EQ(c2.tp, 1);
  EXPECT_EQ(c2.fn, 0);
  EXPECT_EQ(c2.fp, 1);
  EXPECT_EQ(c2.tn, 3);

  const auto in1 = sweep_inputs(outs, false);
  ASSERT_EQ(in1.size(), 5u);
  EXPECT_EQ(in1[0].forecast_ratio, 0.41);
  EXPECT_TRUE(in1[0].actual);
  EXPECT_FALSE(in1[3].actual);
  const auto in2 = sweep_inputs(outs, true);
  EXPECT_TRUE(in2[0].actual);
  EXPECT_FALSE(in2[1].actual);
}
