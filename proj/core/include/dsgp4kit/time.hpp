#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace dsgp4kit {

/// Julian date split as (JD at the preceding 0h UTC, fraction of day in [0, 1)).
/// `day` always ends in .5; keeping the fraction separate preserves
/// sub-microsecond resolution.
struct JulianDate {
  double day = 2451544.5;
  double fraction = 0.0;

  [[nodiscard]] double jd() const noexcept { return day + fraction; }
  friend bool operator==(const JulianDate&, const JulianDate&) = default;
};

struct CalendarTime {
  int year = 2000;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
  double second = 0.0;
};

JulianDate normalized(JulianDate jd);
JulianDate add_minutes(JulianDate jd, double minutes);
/// to - from, in minutes.
double minutes_between(const JulianDate& from, const JulianDate& to);

JulianDate to_julian(const CalendarTime& ct);
CalendarTime to_calendar(const JulianDate& jd);

/// Day-of-year form used by TLE epochs; day 1.0 is Jan 1 0h. Throws
/// Error(BadDayOfYear) outside [1, days_in_year + 1).
JulianDate julian_from_year_day(int year, double day_of_year);
std::pair<int, double> year_day_from_julian(const JulianDate& jd);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff][Z]" (a space may replace the T).
JulianDate parse_iso8601(std::string_view text);
std::string format_iso8601(const JulianDate& jd, int decimals = 6);

}  // namespace dsgp4kit
