// Copyright 2026 the npr-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "npr/error.hpp"

namespace npr {

/// Seconds since the Unix epoch, always UTC.
using UnixSeconds = std::int64_t;

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  friend bool operator==(const CivilDate&, const CivilDate&) = default;
};

/// Days since 1970-01-01 for a proleptic Gregorian date
/// (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline bool is_leap_year(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

inline int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return kDays[m - 1];
}

inline UnixSeconds to_unix_seconds(const CivilDate& date, int hour, int minute, int second) {
  return days_from_civil(date.year, date.month, date.day) * 86400 + hour * 3600 + minute * 60 +
         second;
}

inline CivilDate civil_date_of(UnixSeconds t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) --days;  // floor for pre-epoch instants
  return civil_from_days(days);
}

/// Seconds past UTC midnight of the instant's civil day, in [0, 86400).
inline int seconds_of_day(UnixSeconds t) {
  std::int64_t s = t % 86400;
  if (s < 0) s += 86400;
  return static_cast<int>(s);
}

/// Parse an RFC 3339 timestamp ("2014-09-24T08:30:00Z", offsets and
/// fractional seconds accepted; fractions are truncated). Throws ParseError.
inline UnixSeconds parse_rfc3339(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s,
                  &consumed) != 6 ||
      consumed != 19) {
    throw ParseError("invalid RFC 3339 timestamp: \"" + text + "\"");
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  std::int64_t offset = 0;
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    int oh = 0, om = 0, n2 = 0;
    if (std::sscanf(text.c_str() + pos + 1, "%2d:%2d%n", &oh, &om, &n2) != 2 || n2 != 5) {
      throw ParseError("invalid timezone offset in timestamp: \"" + text + "\"");
    }
    offset = (text[pos] == '+' ? 1 : -1) * (oh * 3600LL + om * 60LL);
    pos += 6;
  } else {
    throw ParseError("missing timezone designator in timestamp: \"" + text + "\"");
  }
  if (pos != text.size()) throw ParseError("trailing characters in timestamp: \"" + text + "\"");
  if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h > 23 || mi > 59 || s > 60) {
    throw ParseError("timestamp field out of range: \"" + text + "\"");
  }
  if (s == 60) s = 59;  // fold leap seconds
  return to_unix_seconds(CivilDate{y, mo, d}, h, mi, s) - offset;
}

/// Format as "YYYY-MM-DDTHH:MM:SSZ".
inline std::string format_rfc3339(UnixSeconds t) {
  const CivilDate date = civil_date_of(t);
  const int sod = seconds_of_day(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", date.year, date.month, date.day,
                sod / 3600, (sod / 60) % 60, sod % 60);
  return buf;
}

/// Parse "YYYY-MM-DD". Throws ParseError.
inline CivilDate parse_civil_date(const std::string& text) {
  int y = 0, m = 0, d = 0, consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%n", &y, &m, &d, &consumed) != 3 ||
      consumed != static_cast<int>(text.size()) || m < 1 || m > 12 || d < 1 ||
      d > days_in_month(y, m)) {
    throw ParseError("invalid date: \"" + text + "\"");
  }
  return CivilDate{y, m, d};
}

}  // namespace npr
