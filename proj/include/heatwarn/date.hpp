// Civil calendar dates and calendar covariates.
#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

namespace heatwarn {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalendarDate {
  int year = 1970;
  int month = 1;  // 1-12
  int day = 1;    // 1-31

  friend auto operator<=>(const CalendarDate&, const CalendarDate&) = default;
};

constexpr bool is_leap(int y) {
  return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

constexpr int days_in_month(int y, int m) {
  constexpr int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : d[m - 1];
}

constexpr bool valid_date(const CalendarDate& d) {
  return d.month >= 1 && d.month <= 12 && d.day >= 1 &&
         d.day <= days_in_month(d.year, d.month);
}

// Days since 1970-01-01 (Howard Hinnant's civil-date algorithm).
constexpr std::int64_t to_days(const CalendarDate& d) {
  int y = d.year - (d.month <= 2);
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153u * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097LL + static_cast<int>(doe) - 719468;
}

constexpr CalendarDate from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
          static_cast<int>(d)};
}

constexpr CalendarDate advance(const CalendarDate& d, std::int64_t n) {
  return from_days(to_days(d) + n);
}

// ISO weekday, 1 = Monday .. 7 = Sunday.
constexpr int day_of_week(const CalendarDate& d) {
  std::int64_t z = to_days(d);
  const int wd = static_cast<int>(z >= -4 ? (z + 4) % 7 : (z + 5) % 7 + 6);
  return wd == 0 ? 7 : wd;
}

// Zero-based day of year: 0 for Jan 1, 364/365 for Dec 31.
constexpr int day_of_year(const CalendarDate& d) {
  return static_cast<int>(to_days(d) - to_days({d.year, 1, 1}));
}

inline std::string format_date(const CalendarDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

inline CalendarDate parse_date(std::string_view s) {
  auto fail = [&] {
    throw DataError("malformed date '" + std::string(s) +
                    "' (expected YYYY-MM-DD)");
  };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
  CalendarDate d;
  auto num = [&](std::string_view part, int& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc{} || p != part.data() + part.size()) fail();
  };
  num(s.substr(0, 4), d.year);
  num(s.substr(5, 2), d.month);
  num(s.substr(8, 2), d.day);
  if (!valid_date(d)) fail();
  return d;
}

using HolidayTable = std::set<CalendarDate>;

struct CalendarCovariates {
  int dow;       // 1=Monday .. 7=Sunday
  int doy;       // 0-based
  bool holiday;
};

inline CalendarCovariates calendar_covariates(const CalendarDate& date,
                                              const HolidayTable& holidays) {
  return {day_of_week(date), day_of_year(date), holidays.contains(date)};
}

}  // namespace heatwarn
