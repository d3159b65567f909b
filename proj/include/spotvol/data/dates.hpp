#pragma once

#include <string>

#include "spotvol/errors.hpp"

namespace spotvol::data {

// Dates travel as yyyymmdd integers, e.g. 20190415.
using Date = int;

inline int date_year(Date d) { return d / 10000; }
inline int date_month(Date d) { return (d / 100) % 100; }
inline int date_day(Date d) { return d % 100; }

// Days since 1970-01-01 (proleptic Gregorian), Hinnant's civil algorithm.
inline long day_number(Date date) {
  int y = date_year(date);
  const int m = date_month(date);
  const int d = date_day(date);
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw DataError("invalid date " + std::to_string(date));
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

inline long days_between(Date from, Date to) {
  return day_number(to) - day_number(from);
}

// Calendar-day year fraction, actual/365.
inline double year_fraction(Date from, Date to) {
  return static_cast<double>(days_between(from, to)) / 365.0;
}

// Inverse of day_number.
inline Date date_from_day_number(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return static_cast<Date>((y + (m <= 2)) * 10000 + static_cast<long>(m) * 100 +
                           static_cast<long>(d));
}

inline Date add_days(Date date, long days) {
  return date_from_day_number(day_number(date) + days);
}

// 0 = Sunday ... 6 = Saturday
inline int day_of_week(Date date) {
  return static_cast<int>((day_number(date) + 4) % 7);
}

inline bool is_weekday(Date date) {
  const int dow = day_of_week(date);
  return dow >= 1 && dow <= 5;
}

inline Date next_weekday(Date date) {
  Date d = add_days(date, 1);
  while (!is_weekday(d)) d = add_days(d, 1);
  return d;
}

}  // namespace spotvol::data
