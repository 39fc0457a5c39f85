#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "heatwarn/metrics.hpp"
#include "reference_counts.hpp"

using namespace heatwarn;

namespace {

struct TableRef {
  const char* name;
  const refdata::CountRow* counts;      // 12 rows
  const refdata::PctRow* expected;      // present rows + Total
  std::size_t expected_rows;
  const refdata::PctRow* published;     // 13 rows or nullptr
};

template <std::size_t N>
TableRef table(const char* name, const refdata::CountRow (&c)[12],
               const refdata::PctRow (&e)[N],
               const refdata::PctRow (*p)[13] = nullptr) {
  return {name, c, e, N, p ? *p : nullptr};
}

std::vector<TableRef> all_tables() {
  using namespace refdata;
  return {
      table("prov_l1", k_all_prov_l1, k_all_prov_l1_expected,
            &k_all_prov_l1_published),
      table("prov_l2", k_all_prov_l2, k_all_prov_l2_expected,
            &k_all_prov_l2_published),
      table("city_l1", k_all_city_l1, k_all_city_l1_expected,
            &k_all_city_l1_published),
      table("city_l2", k_all_city_l2, k_all_city_l2_expected,
            &k_all_city_l2_published),
      table("senior_prov_l1", k_senior_prov_l1, k_senior_prov_l1_expected),
      table("senior_prov_l2", k_senior_prov_l2, k_senior_prov_l2_expected),
      table("senior_city_l1", k_senior_city_l1, k_senior_city_l1_expected),
      table("senior_city_l2", k_senior_city_l2, k_senior_city_l2_expected),
      table("under65_prov_l1", k_under65_prov_l1, k_under65_prov_l1_expected),
      table("under65_prov_l2", k_under65_prov_l2, k_under65_prov_l2_expected),
      table("under65_city_l1", k_under65_city_l1, k_under65_city_l1_expected),
      table("under65_city_l2", k_under65_city_l2, k_under65_city_l2_expected),
  };
}

const refdata::PctRow* find_row(const refdata::PctRow* rows, std::size_t n,
                                const std::string& region) {
  for (std::size_t i = 0; i < n; ++i)
    if (region == rows[i].region) return &rows[i];
  return nullptr;
}

void expect_cell(std::optional<double> got, double want_pct, double tol,
                 const std::string& where) {
  if (want_pct == refdata::kDash) {
    EXPECT_FALSE(got.has_value()) << where;
  } else {
    ASSERT_TRUE(got.has_value()) << where;
    EXPECT_NEAR(*got * 100.0, want_pct, tol) << where;
  }
}

bool inconsistent(const char* tab, const char* region, const char* metric) {
  for (const auto& c : refdata::kInconsistentCells)
    if (std::string(tab) == c.table && std::string(region) == c.region &&
        std::string(metric) == c.metric)
      return true;
  return false;
}

}  // namespace

TEST(Metrics, WorkedExamples) {
  const auto a = metrics({39, 5, 1, 4});
  EXPECT_NEAR(a.accuracy, 43.0 / 49.0, 1e-12);
  EXPECT_NEAR(*a.precision, 39.0 / 44.0, 1e-12);
  EXPECT_NEAR(*a.recall, 39.0 / 40.0, 1e-12);
  EXPECT_NEAR(*a.f1, 2.0 * (39.0 / 44.0) * (39.0 / 40.0) /
                         (39.0 / 44.0 + 39.0 / 40.0),
              1e-12);
  // printed one-decimal forms
  EXPECT_EQ(format_pct(a.accuracy), "87.8");
  EXPECT_EQ(format_pct(a.precision), "88.6");
  EXPECT_EQ(format_pct(a.recall), "97.5");
  EXPECT_EQ(format_pct(a.f1), "92.9");

  const auto b = metrics({34, 3, 5, 11});
  EXPECT_EQ(format_pct(b.accuracy), "84.9");
  EXPECT_EQ(format_pct(b.precision), "91.9");
  EXPECT_EQ(format_pct(b.recall), "87.2");
  EXPECT_EQ(format_pct(b.f1), "89.5");
}

TEST(Metrics, UndefinedCells) {
  // no events reached the level and none were predicted: only accuracy defined
  const auto m = metrics({0, 0, 0, 3});
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_FALSE(m.precision);
  EXPECT_FALSE(m.recall);
  EXPECT_FALSE(m.f1);
  EXPECT_EQ(format_pct(m.precision), "-");

  // precision and recall both 0: F1 undefined rather than 0/0
  const auto z = metrics({0, 1, 1, 2});
  EXPECT_DOUBLE_EQ(*z.precision, 0.0);
  EXPECT_DOUBLE_EQ(*z.recall, 0.0);
  EXPECT_FALSE(z.f1);

  EXPECT_THROW(metrics({0, 0, 0, 0}), DataError);
  EXPECT_THROW(metrics({-1, 0, 0, 3}), DataError);
}

TEST(Metrics, CountTablesReproduceExactly) {
  for (const auto& t : all_tables()) {
    ConfusionCounts total;
    for (int i = 0; i < 12; ++i) {
      const auto& row = t.counts[i];
      if (!row.present) {
        EXPECT_EQ(find_row(t.expected, t.expected_rows, row.region), nullptr)
            << t.name << " " << row.region;
        continue;
      }
      total += ConfusionCounts{row.tp, row.fp, row.fn, row.tn};
      const auto* want = find_row(t.expected, t.expected_rows, row.region);
      ASSERT_NE(want, nullptr) << t.name << " " << row.region;
      const auto m = metrics({row.tp, row.fp, row.fn, row.tn});
      const std::string where = std::string(t.name) + " " + row.region;
      expect_cell(m.accuracy, want->acc, 1e-5, where + " acc");
      expect_cell(m.precision, want->pr, 1e-5, where + " pr");
      expect_cell(m.recall, want->rec, 1e-5, where + " rec");
      expect_cell(m.f1, want->f1, 1e-5, where + " f1");
    }
    // Total row is the micro-average: metrics of the pooled counts
    const auto* want = find_row(t.expected, t.expected_rows, "Total");
    ASSERT_NE(want, nullptr) << t.name;
    const auto m = metrics(total);
    expect_cell(m.accuracy, want->acc, 1e-5, std::string(t.name) + " Total");
    expect_cell(m.precision, want->pr, 1e-5, std::string(t.name) + " Total");
    expect_cell(m.recall, want->rec, 1e-5, std::string(t.name) + " Total");
    expect_cell(m.f1, want->f1, 1e-5, std::string(t.name) + " Total");
  }
}

TEST(Metrics, PublishedTablesWithinTenthOfAPoint) {
  int checked = 0, excluded = 0;
  for (const auto& t : all_tables()) {
    if (!t.published) continue;
    ConfusionCounts total;
    for (int i = 0; i < 12; ++i)
      total += ConfusionCounts{t.counts[i].tp, t.counts[i].fp, t.counts[i].fn,
                               t.counts[i].tn};
    for (int i = 0; i < 13; ++i) {
      const auto& pub = t.published[i];
      const MetricSet m =
          i < 12 ? metrics({t.counts[i].tp, t.counts[i].fp, t.counts[i].fn,
                            t.counts[i].tn})
                 : metrics(total);
      const auto cell = [&](std::optional<double> got, double want,
                            const char* metric) {
        if (inconsistent(t.name, pub.region, metric)) {
          ++excluded;
          return;
        }
        ++checked;
        expect_cell(got, want, 0.1,
                    std::string(t.name) + " " + pub.region + " " + metric);
      };
      cell(m.accuracy, pub.acc, "acc");
      cell(m.precision, pub.pr, "pr");
      cell(m.recall, pub.rec, "rec");
      cell(m.f1, pub.f1, "f1");
    }
  }
  EXPECT_EQ(excluded, 13);  // every known transcription discrepancy, no more
  EXPECT_EQ(checked, 4 * 13 * 4 - 13);
}

TEST(Metrics, FpFnRateExamples) {
  const auto a = fp_fn_rates({1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(*a.fpr, 0.5);
  EXPECT_DOUBLE_EQ(*a.fnr, 0.5);
  const auto b = fp_fn_rates({5, 0, 0, 5});
  EXPECT_DOUBLE_EQ(*b.fpr, 0.0);
  EXPECT_DOUBLE_EQ(*b.fnr, 0.0);
  const auto c = fp_fn_rates({0, 0, 2, 0});
  EXPECT_FALSE(c.fpr);  // no negatives observed
  EXPECT_DOUBLE_EQ(*c.fnr, 1.0);
}

TEST(Metrics, SweepGridShape) {
  const std::vector<SweepInput> in{{0.2, true}, {0.1, false}};
  const auto pts = sweep(in);
  ASSERT_EQ(pts.size(), 491u);
  EXPECT_DOUBLE_EQ(pts.front().alpha, 0.010);
  EXPECT_DOUBLE_EQ(pts.back().alpha, 0.500);
  EXPECT_NEAR(pts[1].alpha - pts[0].alpha, 0.001, 1e-12);
  EXPECT_THROW(sweep({}), DataError);
  EXPECT_THROW(sweep(in, 0.2, 0.1), DataError);
  EXPECT_THROW(sweep(in, 0.1, 0.2, 0.0), DataError);
}

TEST(Metrics, SweepMonotoneAndLimits) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> ratio(0.02, 0.49);
  std::bernoulli_distribution truth(0.5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<SweepInput> in;
    bool any_pos = false, any_neg = false;
    for (int i = 0; i < 40; ++i) {
      const bool a = truth(rng);
      any_pos |= a;
      any_neg |= !a;
      in.push_back({ratio(rng), a});
    }
    if (!any_pos || !any_neg) continue;
    const auto pts = sweep(in);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      EXPECT_GE(*pts[i - 1].fpr, *pts[i].fpr);
      EXPECT_LE(*pts[i - 1].fnr, *pts[i].fnr);
    }
    // alpha below every ratio: always alarm -> (1, 0); above: never -> (0, 1)
    EXPECT_DOUBLE_EQ(*pts.front().fpr, 1.0);
    EXPECT_DOUBLE_EQ(*pts.front().fnr, 0.0);
    EXPECT_DOUBLE_EQ(*pts.back().fpr, 0.0);
    EXPECT_DOUBLE_EQ(*pts.back().fnr, 1.0);
  }
}

TEST(Metrics, SweepStrictThreshold) {
  // ratio exactly at alpha does not alarm
  const std::vector<SweepInput> in{{0.25, true}};
  const auto pts = sweep(in, 0.25, 0.25, 0.001);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_DOUBLE_EQ(*pts[0].fnr, 1.0);
}
