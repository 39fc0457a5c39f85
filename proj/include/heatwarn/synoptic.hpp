// Heatwave detection from daily synoptic air-mass codes.
//
// A 3-day window qualifies when all three days are DT, or the window holds at
// least one DT and at least one MT. A day qualifies when any in-range window
// containing it qualifies. Events are maximal runs of qualifying days.
#pragma once

#include <span>
#include <vector>

#include "heatwarn/series.hpp"

namespace heatwarn {

struct HeatwaveEvent {
  CalendarDate start;
  CalendarDate end;  // inclusive
  int length = 0;

  friend bool operator==(const HeatwaveEvent&, const HeatwaveEvent&) = default;
};

inline bool window_qualifies(SscCode a, SscCode b, SscCode c) {
  int dt = (a == SscCode::DT) + (b == SscCode::DT) + (c == SscCode::DT);
  if (dt == 3) return true;
  int mt = (a == SscCode::MT) + (b == SscCode::MT) + (c == SscCode::MT);
  return dt >= 1 && mt >= 1;
}

inline bool window_qualifies(const std::array<SscCode, 3>& w) {
  return window_qualifies(w[0], w[1], w[2]);
}

// Windows are indexed by their first day; windows containing day t start at
// t-2, t-1, t. Boundary days consider only windows fully inside the sequence.
inline bool day_qualifies(std::span<const SscCode> codes, std::size_t t) {
  if (codes.size() < 3 || t >= codes.size()) return false;
  std::size_t first = t >= 2 ? t - 2 : 0;
  std::size_t last = std::min(t, codes.size() - 3);
  for (std::size_t w = first; w <= last; ++w)
    if (window_qualifies(codes[w], codes[w + 1], codes[w + 2])) return true;
  return false;
}

// Maximal runs of qualifying days, as [start,end] index pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> detect_runs(
    std::span<const SscCode> codes) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  if (codes.size() < 3) return runs;
  // One pass over windows marks member days; cheaper than 3 window checks per
  // day and identical by construction.
  std::vector<char> qualifies(codes.size(), 0);
  for (std::size_t w = 0; w + 3 <= codes.size(); ++w)
    if (window_qualifies(codes[w], codes[w + 1], codes[w + 2]))
      qualifies[w] = qualifies[w + 1] = qualifies[w + 2] = 1;
  for (std::size_t i = 0; i < qualifies.size(); ++i) {
    if (!qualifies[i]) continue;
    std::size_t j = i;
    while (j + 1 < qualifies.size() && qualifies[j + 1]) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  return runs;
}

inline std::vector<HeatwaveEvent> detect_heatwaves(const DailySeries& series) {
  std::vector<SscCode> codes;
  codes.reserve(series.size());
  std::string missing;
  for (const auto& rec : series.records) {
    if (!rec.ssc) {
      if (!missing.empty()) missing += ", ";
      if (missing.size() < 256) missing += format_date(rec.date);
    } else {
      codes.push_back(*rec.ssc);
    }
  }
  if (!missing.empty())
    throw DataError("missing SSC codes on: " + missing);
  std::vector<HeatwaveEvent> events;
  for (auto [i, j] : detect_runs(codes))
    events.push_back({series.records[i].date, series.records[j].date,
                      static_cast<int>(j - i + 1)});
  return events;
}

// Real-time event scanner. Feed codes one day at a time; queries answer from
// what has been fed so far, never ahead of it.
//
// A day's qualification is fully settled once codes through day+2 are known
// (all three windows in range). Before that, a day can still be *confirmed*
// early when one of its already-visible windows qualifies; it cannot be ruled
// out early. The rolling runner only ever needs confirmations:
//   - event start s: settled from codes through s+2,
//   - continuation through day d at a horizon edge: confirmed via d's
//     backward window [d-2, d].
// A day that qualifies only through a forward window is confirmed two days
// late; runs whose interior days all carry a qualifying backward window (true
// for the generator's event patterns) scan identically to the offline
// detector.
class OnlineEventScanner {
 public:
  void push(SscCode c) { codes_.push_back(c); }
  std::size_t fed() const { return codes_.size(); }

  // Fully determined: every window containing day t has been fed (the series
  // itself continues past the fed prefix, so that means codes through t+2).
  bool settled(std::size_t t) const { return codes_.size() >= t + 3; }

  // day_qualifies over the fed prefix only; exact once settled(t).
  bool qualifies_so_far(std::size_t t) const {
    if (t >= codes_.size()) return false;
    return day_qualifies(std::span<const SscCode>(codes_), t);
  }

  // True when day t is confirmed qualifying using only fed codes.
  bool confirmed(std::size_t t) const { return qualifies_so_far(t); }

  // True when day t is settled non-qualifying.
  bool ruled_out(std::size_t t) const {
    return settled(t) && !qualifies_so_far(t);
  }

 private:
  std::vector<SscCode> codes_;
};

}  // namespace heatwarn
