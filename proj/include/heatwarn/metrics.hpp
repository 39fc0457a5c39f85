// Confusion-count metrics and the alarm-threshold sweep. Percentages render
// with "-" for undefined cells (zero denominators), matching the published
// table convention.
#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "heatwarn/date.hpp"

namespace heatwarn {

struct ConfusionCounts {
  long long tp = 0, fp = 0, fn = 0, tn = 0;

  long long total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  void validate() const {
    if (tp < 0 || fp < 0 || fn < 0 || tn < 0)
      throw DataError("confusion counts must be non-negative");
  }
};

struct MetricSet {
  double accuracy = 0.0;
  std::optional<double> precision, recall, f1;
};

inline MetricSet metrics(const ConfusionCounts& c) {
  c.validate();
  if (c.total() == 0) throw DataError("metrics: all-zero counts");
  MetricSet m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp > 0)
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0)
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (m.precision && m.recall && (*m.precision > 0.0 || *m.recall > 0.0))
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

struct RatePair {
  std::optional<double> fpr, fnr;
};

inline RatePair fp_fn_rates(const ConfusionCounts& c) {
  c.validate();
  RatePair r;
  if (c.fp + c.tn > 0)
    r.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  if (c.fn + c.tp > 0)
    r.fnr = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
  return r;
}

// Value as a percentage with one decimal, or "-" when undefined.
inline std::string format_pct(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
  return buf;
}

struct SweepPoint {
  double alpha = 0.0;
  std::optional<double> fpr, fnr;
};

// Cached per-event sweep input: the pipeline's best forecast ratio and the
// fixed observed truth for one task (level predicate applied up front).
struct SweepInput {
  double forecast_ratio = 0.0;
  bool actual = false;
};

// Recompute alarms from cached ratios over the threshold grid; no model
// re-run. Grid walks integer thousandths to keep the endpoints exact.
inline std::vector<SweepPoint> sweep(const std::vector<SweepInput>& inputs,
                                     double alpha_min = 0.01,
                                     double alpha_max = 0.50,
                                     double step = 0.001) {
  if (inputs.empty()) throw DataError("sweep: no outcomes");
  if (!(alpha_min <= alpha_max) || !(step > 0))
    throw DataError("sweep: bad grid");
  const long long lo = std::llround(alpha_min * 1000.0);
  const long long hi = std::llround(alpha_max * 1000.0);
  const long long inc = std::llround(step * 1000.0);
  if (inc <= 0) throw DataError("sweep: step below grid resolution");
  std::vector<SweepPoint> out;
  out.reserve(static_cast<std::size_t>((hi - lo) / inc + 1));
  for (long long a = lo; a <= hi; a += inc) {
    const double alpha = static_cast<double>(a) / 1000.0;
    ConfusionCounts c;
    for (const auto& e : inputs) {
      const bool alarm = e.forecast_ratio > alpha;
      if (e.actual)
        (alarm ? c.tp : c.fn)++;
      else
        (alarm ? c.fp : c.tn)++;
    }
    const RatePair r = fp_fn_rates(c);
    out.push_back({alpha, r.fpr, r.fnr});
  }
  return out;
}

}  // namespace heatwarn
