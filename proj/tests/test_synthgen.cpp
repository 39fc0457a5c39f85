#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "heatwarn/glm.hpp"
#include "heatwarn/synoptic.hpp"
#include "heatwarn/synthgen.hpp"

using namespace heatwarn;

namespace {

WorldParams quiet_world(int years, std::uint64_t seed) {
  WorldParams p;
  p.years = years;
  p.seed = seed;
  return p;
}

bool same_record(const DailyRecord& a, const DailyRecord& b) {
  return a.date == b.date && a.deaths == b.deaths && a.meteo == b.meteo &&
         a.holiday == b.holiday && a.ssc == b.ssc;
}

}  // namespace

TEST(Synthgen, DeterministicForFixedSeed) {
  WorldParams p = quiet_world(2, 42);
  p.events.push_back({{2001, 7, 4}, 6, 1.3, SscPattern::mixed});
  const auto [s1, t1] = generate(p);
  const auto [s2, t2] = generate(p);
  ASSERT_EQ(s1.records.size(), s2.records.size());
  for (std::size_t i = 0; i < s1.records.size(); ++i)
    EXPECT_TRUE(same_record(s1.records[i], s2.records[i])) << i;
  EXPECT_EQ(t1.mu, t2.mu);

  p.seed = 43;
  const auto [s3, t3] = generate(p);
  bool all_equal = true;
  for (std::size_t i = 0; i < s1.records.size(); ++i)
    all_equal = all_equal && same_record(s1.records[i], s3.records[i]);
  EXPECT_FALSE(all_equal);
  EXPECT_EQ(t1.mu, t3.mu);  // truth means do not depend on the seed
}

TEST(Synthgen, ParamValidation) {
  EXPECT_THROW(generate(quiet_world(0, 1)), DataError);

  WorldParams p = quiet_world(2, 1);
  p.ar1_rho = 1.0;
  EXPECT_THROW(generate(p), DataError);

  p = quiet_world(2, 1);
  p.events.push_back({{2000, 7, 1}, 0, 1.2, SscPattern::dry});
  EXPECT_THROW(generate(p), DataError);

  p.events = {{{2000, 7, 1}, 3, 0.9, SscPattern::dry}};
  EXPECT_THROW(generate(p), DataError);

  p.events = {{{1999, 7, 1}, 3, 1.2, SscPattern::dry}};
  EXPECT_THROW(generate(p), DataError);

  p.events = {{{2000, 5, 30}, 3, 1.2, SscPattern::dry}};  // starts in May
  EXPECT_THROW(generate(p), DataError);

  p.events = {{{2000, 9, 29}, 5, 1.2, SscPattern::dry}};  // runs into October
  EXPECT_THROW(generate(p), DataError);

  p.events = {{{2000, 7, 1}, 5, 1.2, SscPattern::dry},
              {{2000, 7, 5}, 3, 1.2, SscPattern::dry}};  // overlap
  EXPECT_THROW(generate(p), DataError);

  p.events = {{{2000, 7, 5}, 3, 1.2, SscPattern::dry},
              {{2000, 7, 1}, 3, 1.2, SscPattern::dry}};  // unsorted
  EXPECT_THROW(generate(p), DataError);
}

TEST(Synthgen, DetectorRecoversInjectedEvents) {
  WorldParams p = quiet_world(3, 11);
  p.events = {{{2000, 6, 10}, 4, 1.2, SscPattern::dry},
              {{2000, 8, 2}, 9, 1.4, SscPattern::mixed},
              {{2001, 7, 20}, 3, 1.1, SscPattern::dry},
              {{2002, 9, 5}, 7, 1.5, SscPattern::mixed}};
  const auto [series, truth] = generate(p);
  const auto found = detect_heatwaves(series);
  ASSERT_EQ(found.size(), p.events.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    EXPECT_EQ(found[i].start, p.events[i].start);
    EXPECT_EQ(found[i].end, p.events[i].end());
    EXPECT_EQ(found[i].length, p.events[i].length);
    EXPECT_EQ(truth_label(truth, found[i]),
              truth_level(p.events[i].multiplier));
  }
  EXPECT_THROW(truth_label(truth, {{2001, 1, 1}, {2001, 1, 2}, 2}), DataError);
}

TEST(Synthgen, EventCodePatterns) {
  WorldParams p = quiet_world(1, 5);
  p.events = {{{2000, 7, 1}, 7, 1.3, SscPattern::mixed},
              {{2000, 8, 10}, 4, 1.2, SscPattern::dry}};
  const auto [series, truth] = generate(p);
  const auto at = [&](const CalendarDate& d) {
    return *series.records[static_cast<std::size_t>(series.index_of(d))].ssc;
  };
  // mixed, length 7: DT DT MT DT MT DT DT
  const SscCode want[7] = {SscCode::DT, SscCode::DT, SscCode::MT, SscCode::DT,
                           SscCode::MT, SscCode::DT, SscCode::DT};
  for (int k = 0; k < 7; ++k)
    EXPECT_EQ(at(advance({2000, 7, 1}, k)), want[k]) << k;
  for (int k = 0; k < 4; ++k)
    EXPECT_EQ(at(advance({2000, 8, 10}, k)), SscCode::DT);
  // quiet days never carry tropical codes
  for (const auto& rec : series.records) {
    const bool in_event =
        (p.events[0].start <= rec.date && rec.date <= p.events[0].end()) ||
        (p.events[1].start <= rec.date && rec.date <= p.events[1].end());
    if (!in_event) {
      EXPECT_NE(*rec.ssc, SscCode::DT);
      EXPECT_NE(*rec.ssc, SscCode::MT);
    }
  }
}

TEST(Synthgen, NonEventPearsonDispersionNearOne) {
  const auto [series, truth] = generate(quiet_world(12, 314));
  double chi = 0, musum = 0;
  for (std::size_t i = 0; i < series.records.size(); ++i) {
    const double x = *series.records[i].deaths;
    const double mu = truth.mu[i];
    chi += (x - mu) * (x - mu) / mu;
    musum += mu;
  }
  EXPECT_GT(musum, 0.0);
  const double ratio = chi / static_cast<double>(series.records.size());
  EXPECT_GT(ratio, 0.9);
  EXPECT_LT(ratio, 1.1);
}

TEST(Synthgen, UnitMultiplierAddsNoDeaths) {
  // a multiplier-1.0 event leaves event-day deaths at the seasonal mean;
  // pooled z-score over 200 seeded worlds stays within 3 sigma
  double excess = 0, var = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    WorldParams p = quiet_world(1, 7000 + seed);
    p.events = {{{2000, 7, 10}, 5, 1.0, SscPattern::dry}};
    const auto [series, truth] = generate(p);
    const auto i0 = series.index_of({2000, 7, 10});
    for (int k = 0; k < 5; ++k) {
      const std::size_t i = static_cast<std::size_t>(i0 + k);
      excess += *series.records[i].deaths - truth.mu[i];
      var += truth.mu[i];
    }
  }
  EXPECT_LT(std::abs(excess) / std::sqrt(var), 3.0);
}

TEST(Synthgen, ObservedLabelsAgreeWithDesignedLabels) {
  // 25 worlds x 8 events, designed ratios cycling {0.05, 0.25, 0.45}, all
  // at least 0.05 away from both alarm thresholds; high counts keep the
  // observed max ratio concentrated near the designed one
  static constexpr double kMult[3] = {1.05, 1.25, 1.45};
  int agree = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    WorldParams p = quiet_world(3, 4000 + seed);
    p.base_mortality = std::log(8000.0);
    for (int k = 0; k < 8; ++k)
      p.events.push_back({advance({2002, 6, 5}, 14 * k), 4, kMult[k % 3],
                          k % 2 ? SscPattern::mixed : SscPattern::dry});
    const auto [series, truth] = generate(p);

    std::vector<double> counts;
    const auto hi = series.index_of({2002, 1, 1});
    for (std::int64_t i = 0; i < hi; ++i)
      counts.push_back(*series.records[static_cast<std::size_t>(i)].deaths);
    HolidayTable holidays;
    for (int y = 2000; y <= 2002; ++y)
      for (auto [m, d] : synth_holidays()) holidays.insert({y, m, d});
    const auto fit = fit_irls_span(counts, {2000, 1, 1}, holidays);

    for (const auto& e : p.events) {
      const HeatwaveEvent ev{e.start, e.end(), e.length};
      const auto lbl = label_event(series, fit, ev);
      agree += lbl.level == truth_label(truth, ev);
      ++total;
    }
  }
  EXPECT_EQ(total, 200);
  EXPECT_GE(agree, 180);  // >= 90%
}

TEST(Synthgen, BenchmarkWorldShape) {
  const auto p = make_benchmark_params(20);
  EXPECT_NO_THROW(p.validate());
  ASSERT_EQ(p.events.size(), 60u);
  int by_mult[3] = {0, 0, 0};
  const double designed[3] = {1.05, 1.25, 1.45};
  for (std::size_t i = 0; i < p.events.size(); ++i) {
    const auto& e = p.events[i];
    EXPECT_GE(e.start.month, 6);
    EXPECT_LE(e.end().month, 9);
    EXPECT_GE(e.length, 7);
    EXPECT_LE(e.length, 12);
    for (int m = 0; m < 3; ++m)
      if (e.multiplier == designed[m]) ++by_mult[m];
  }
  EXPECT_EQ(by_mult[0], 20);
  EXPECT_EQ(by_mult[1], 20);
  EXPECT_EQ(by_mult[2], 20);
  EXPECT_EQ(make_benchmark_params(2).events.size(), 6u);
}

TEST(Synthgen, TruthLevelMapping) {
  EXPECT_EQ(truth_level(1.40), HeatwaveLevel::L2);
  EXPECT_EQ(truth_level(1.20), HeatwaveLevel::L1);
  EXPECT_EQ(truth_level(1.10), HeatwaveLevel::L0);
  EXPECT_EQ(truth_level(1.05), HeatwaveLevel::L0);
  EXPECT_EQ(truth_level(1.45), HeatwaveLevel::L2);
}

TEST(Synthgen, EventDaysRunHot) {
  WorldParams p = quiet_world(1, 9);
  p.events = {{{2000, 7, 10}, 5, 1.45, SscPattern::dry}};
  const auto [series, truth] = generate(p);
  // same calendar days, no event: the designed boost is 8 + 15 * 0.45 degrees
  WorldParams q = quiet_world(1, 9);
  const auto [base, tb] = generate(q);
  const auto i0 = series.index_of({2000, 7, 10});
  for (int k = 0; k < 5; ++k) {
    const std::size_t i = static_cast<std::size_t>(i0 + k);
    const double hot = *series.records[i].meteo[0];
    const double cold = *base.records[i].meteo[0];
    EXPECT_GT(hot, cold + 5.0);
  }
}
