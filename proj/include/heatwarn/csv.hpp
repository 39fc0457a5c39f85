// CSV ingestion and serialization for the fixed input schemas.
//
// All files are UTF-8 with a header row and ISO-8601 dates:
//   mortality: date,deaths
//   meteo:     date,temp_c,pressure_hpa,wind_ms,humidity_pct   (empty = missing)
//   ssc:       date,code        code in {DP,DM,DT,MP,MM,MT,OTHER}
//   holidays:  date
#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "heatwarn/series.hpp"

namespace heatwarn {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

inline double parse_real(const std::string& field, const std::string& where) {
  double v;
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || p != field.data() + field.size())
    throw DataError("bad numeric field '" + field + "' in " + where);
  return v;
}

struct CsvFile {
  std::string path;
  std::vector<std::vector<std::string>> rows;  // header excluded
};

inline CsvFile read_csv(const std::string& path, std::size_t expect_cols) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  CsvFile file{path, {}};
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != expect_cols)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(expect_cols) + " fields, got " +
                      std::to_string(fields.size()));
    file.rows.push_back(std::move(fields));
  }
  return file;
}

}  // namespace detail

inline HolidayTable read_holidays_csv(const std::string& path) {
  HolidayTable table;
  for (const auto& row : detail::read_csv(path, 1).rows)
    table.insert(parse_date(row[0]));
  return table;
}

// Merge the input files into one dense series spanning the min..max date seen
// across all of them; dates absent from a file get missing values.
inline DailySeries ingest_csv(const std::string& mortality_path,
                              const std::string& meteo_path,
                              const std::string& ssc_path = {},
                              const std::string& holidays_path = {},
                              const std::string& region_name = "region",
                              RegionLevel level = RegionLevel::city) {
  std::map<CalendarDate, double> deaths;
  for (const auto& row : detail::read_csv(mortality_path, 2).rows) {
    CalendarDate d = parse_date(row[0]);
    double v = detail::parse_real(row[1], mortality_path);
    if (v < 0)
      throw DataError(mortality_path + ": negative death count on " + row[0]);
    if (!deaths.emplace(d, v).second)
      throw DataError(mortality_path + ": duplicate date " + row[0]);
  }
  if (deaths.empty()) throw DataError(mortality_path + ": no data rows");

  std::map<CalendarDate, std::array<std::optional<double>, kMeteoDims>> meteo;
  if (!meteo_path.empty()) {
    for (const auto& row : detail::read_csv(meteo_path, 1 + kMeteoDims).rows) {
      CalendarDate d = parse_date(row[0]);
      std::array<std::optional<double>, kMeteoDims> m;
      for (int k = 0; k < kMeteoDims; ++k)
        if (!row[1 + k].empty())
          m[k] = detail::parse_real(row[1 + k], meteo_path);
      if (m[3] && (*m[3] < 0.0 || *m[3] > 100.0))
        throw DataError(meteo_path + ": humidity out of [0,100] on " + row[0]);
      if (!meteo.emplace(d, m).second)
        throw DataError(meteo_path + ": duplicate date " + row[0]);
    }
  }

  std::map<CalendarDate, SscCode> ssc;
  if (!ssc_path.empty()) {
    for (const auto& row : detail::read_csv(ssc_path, 2).rows) {
      CalendarDate d = parse_date(row[0]);
      if (!ssc.emplace(d, parse_ssc(row[1])).second)
        throw DataError(ssc_path + ": duplicate date " + row[0]);
    }
  }

  HolidayTable holidays;
  if (!holidays_path.empty()) holidays = read_holidays_csv(holidays_path);

  CalendarDate lo = deaths.begin()->first;
  CalendarDate hi = deaths.rbegin()->first;
  auto widen = [&](const CalendarDate& d) {
    if (d < lo) lo = d;
    if (hi < d) hi = d;
  };
  if (!meteo.empty()) widen(meteo.begin()->first), widen(meteo.rbegin()->first);
  if (!ssc.empty()) widen(ssc.begin()->first), widen(ssc.rbegin()->first);

  DailySeries series{region_name, level, {}};
  series.records.reserve(to_days(hi) - to_days(lo) + 1);
  for (std::int64_t z = to_days(lo); z <= to_days(hi); ++z) {
    DailyRecord rec;
    rec.date = from_days(z);
    if (auto it = deaths.find(rec.date); it != deaths.end())
      rec.deaths = it->second;
    if (auto it = meteo.find(rec.date); it != meteo.end()) rec.meteo = it->second;
    if (auto it = ssc.find(rec.date); it != ssc.end()) rec.ssc = it->second;
    rec.holiday = holidays.contains(rec.date);
    series.records.push_back(rec);
  }
  return series;
}

// Shortest round-trip formatting: the printed text parses back to the exact
// same double, and canonical inputs re-serialize byte-identically.
inline std::string format_real(double v) {
  char buf[48];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline void write_mortality_csv(std::ostream& out, const DailySeries& s) {
  out << "date,deaths\n";
  for (const auto& r : s.records)
    if (r.deaths)
      out << format_date(r.date) << ',' << format_real(*r.deaths) << '\n';
}

inline void write_meteo_csv(std::ostream& out, const DailySeries& s) {
  out << "date,temp_c,pressure_hpa,wind_ms,humidity_pct\n";
  for (const auto& r : s.records) {
    out << format_date(r.date);
    for (int k = 0; k < kMeteoDims; ++k) {
      out << ',';
      if (r.meteo[k]) out << format_real(*r.meteo[k]);
    }
    out << '\n';
  }
}

inline void write_ssc_csv(std::ostream& out, const DailySeries& s) {
  out << "date,code\n";
  for (const auto& r : s.records)
    if (r.ssc) out << format_date(r.date) << ',' << to_string(*r.ssc) << '\n';
}

inline void write_holidays_csv(std::ostream& out, const DailySeries& s) {
  out << "date\n";
  for (const auto& r : s.records)
    if (r.holiday) out << format_date(r.date) << '\n';
}

}  // namespace heatwarn
