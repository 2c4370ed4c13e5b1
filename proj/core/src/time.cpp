#include "dsgp4kit/time.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "dsgp4kit/error.hpp"

namespace dsgp4kit {
namespace {

constexpr double kUnixEpochJd = 2440587.5;

double jd_midnight(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) throw Error(ErrorCode::Parse, "invalid calendar date");
  return kUnixEpochJd + static_cast<double>(sys_days{ymd}.time_since_epoch().count());
}

bool is_leap(int year) { return std::chrono::year{year}.is_leap(); }

}  // namespace

JulianDate normalized(JulianDate jd) {
  const double shifted = jd.day - 0.5;
  double base = std::floor(shifted);
  double frac = jd.fraction + (shifted - base);
  const double whole = std::floor(frac);
  base += whole;
  frac -= whole;
  return {base + 0.5, frac};
}

JulianDate add_minutes(JulianDate jd, double minutes) {
  jd.fraction += minutes / 1440.0;
  return normalized(jd);
}

double minutes_between(const JulianDate& from, const JulianDate& to) {
  return ((to.day - from.day) + (to.fraction - from.fraction)) * 1440.0;
}

JulianDate to_julian(const CalendarTime& ct) {
  JulianDate jd;
  jd.day = jd_midnight(ct.year, static_cast<unsigned>(ct.month), static_cast<unsigned>(ct.day));
  jd.fraction = (ct.hour * 3600.0 + ct.minute * 60.0 + ct.second) / 86400.0;
  return normalized(jd);
}

CalendarTime to_calendar(const JulianDate& in) {
  using namespace std::chrono;
  const JulianDate jd = normalized(in);
  const auto days_since_unix = static_cast<int>(std::lround(jd.day - kUnixEpochJd));
  const year_month_day ymd{sys_days{std::chrono::days{days_since_unix}}};
  CalendarTime ct;
  ct.year = static_cast<int>(ymd.year());
  ct.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  ct.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  double secs = jd.fraction * 86400.0;
  ct.hour = static_cast<int>(secs / 3600.0);
  secs -= ct.hour * 3600.0;
  ct.minute = static_cast<int>(secs / 60.0);
  ct.second = secs - ct.minute * 60.0;
  return ct;
}

JulianDate julian_from_year_day(int year, double day_of_year) {
  const double days_in_year = is_leap(year) ? 366.0 : 365.0;
  if (!(day_of_year >= 1.0) || !(day_of_year < days_in_year + 1.0)) {
    throw Error(ErrorCode::BadDayOfYear, "day of year out of range: " + std::to_string(day_of_year));
  }
  JulianDate jd;
  const double whole = std::floor(day_of_year);
  jd.day = jd_midnight(year, 1, 1) + (whole - 1.0);
  jd.fraction = day_of_year - whole;
  return jd;
}

std::pair<int, double> year_day_from_julian(const JulianDate& in) {
  const JulianDate jd = normalized(in);
  const CalendarTime ct = to_calendar(jd);
  const double jan1 = jd_midnight(ct.year, 1, 1);
  return {ct.year, (jd.day - jan1) + 1.0 + jd.fraction};
}

JulianDate parse_iso8601(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double s = 0.0;
  char sep = 0;
  int consumed = 0;
  const std::string buf(text);
  const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d:%lf%n", &y, &mo, &d, &sep, &h, &mi, &s, &consumed);
  if (n < 7 || (sep != 'T' && sep != ' ')) {
    throw Error(ErrorCode::Parse, "bad ISO-8601 timestamp: " + buf);
  }
  std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z" || rest == "z")) {
    throw Error(ErrorCode::Parse, "bad ISO-8601 timestamp: " + buf);
  }
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0.0 || s >= 61.0) {
    throw Error(ErrorCode::Parse, "bad ISO-8601 time of day: " + buf);
  }
  return to_julian(CalendarTime{y, mo, d, h, mi, s});
}

std::string format_iso8601(const JulianDate& jd, int decimals) {
  // Round on the fraction first so 59.9999999 s never prints as 60.
  const double scale = std::pow(10.0, decimals);
  JulianDate r = jd;
  r.fraction = std::round(normalized(jd).fraction * 86400.0 * scale) / (86400.0 * scale);
  r = normalized(r);
  const CalendarTime ct = to_calendar(r);
  const double secs_exact = std::round(r.fraction * 86400.0 * scale) / scale - ct.hour * 3600.0 - ct.minute * 60.0;
  char out[64];
  if (decimals > 0) {
    std::snprintf(out, sizeof out, "%04d-%02d-%02dT%02d:%02d:%0*.*fZ", ct.year, ct.month, ct.day, ct.hour,
                  ct.minute, decimals + 3, decimals, secs_exact);
  } else {
    std::snprintf(out, sizeof out, "%04d-%02d-%02dT%02d:%02d:%02dZ", ct.year, ct.month, ct.day, ct.hour, ct.minute,
                  static_cast<int>(secs_exact));
  }
  return out;
}

}  // namespace dsgp4kit
