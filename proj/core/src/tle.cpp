#include "dsgp4kit/tle.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>

namespace dsgp4kit {
namespace {

constexpr std::size_t kLineLength = 69;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string_view strip_trailing(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

// 1-based inclusive column range.
std::string_view columns(std::string_view line, int first, int last) {
  return line.substr(static_cast<std::size_t>(first - 1), static_cast<std::size_t>(last - first + 1));
}

[[noreturn]] void field_error(std::string_view name, int first, int last) {
  throw TleError(ErrorCode::UnparsableField,
                 "unparsable " + std::string(name) + " in columns " + std::to_string(first) + "-" +
                     std::to_string(last),
                 first, last);
}

double to_double(std::string_view text, std::string_view name, int first, int last) {
  std::string_view t = trim(text);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  if (t.empty()) field_error(name, first, last);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) field_error(name, first, last);
  return v;
}

int to_int(std::string_view text, std::string_view name, int first, int last, bool blank_is_zero = false) {
  std::string_view t = trim(text);
  if (t.empty()) {
    if (blank_is_zero) return 0;
    field_error(name, first, last);
  }
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) field_error(name, first, last);
  return v;
}

// " 59112-4" -> 0.59112e-4. Sign, implied leading decimal, signed exponent.
double parse_exp_field(std::string_view text, std::string_view name, int first, int last) {
  std::string_view t = trim(text);
  if (t.empty()) field_error(name, first, last);
  std::string mantissa_sign;
  if (t.front() == '-' || t.front() == '+') {
    if (t.front() == '-') mantissa_sign = "-";
    t.remove_prefix(1);
  }
  const std::size_t esign = t.find_last_of("+-");
  if (esign == std::string_view::npos || esign == 0 || esign + 1 >= t.size()) field_error(name, first, last);
  const std::string_view digits = t.substr(0, esign);
  const std::string_view exponent = t.substr(esign);
  for (char c : digits) {
    if (c < '0' || c > '9') field_error(name, first, last);
  }
  const std::string literal = mantissa_sign + "0." + std::string(digits) + "e" + std::string(exponent);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), v);
  if (ec != std::errc{} || ptr != literal.data() + literal.size()) field_error(name, first, last);
  return v;
}

std::string format_exp_field(double value, std::string_view name) {
  if (value == 0.0) return " 00000-0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", std::fabs(value));  // d.dddde±XX
  const std::string s(buf);
  const std::string digits = s.substr(0, 1) + s.substr(2, 4);
  const int exp10 = std::stoi(s.substr(s.find('e') + 1)) + 1;
  if (exp10 < -9 || exp10 > 9) {
    throw TleError(ErrorCode::FieldOverflow, "field overflow: " + std::string(name));
  }
  std::string out;
  out += value < 0 ? '-' : ' ';
  out += digits;
  out += exp10 <= 0 ? '-' : '+';
  out += static_cast<char>('0' + std::abs(exp10));
  return out;
}

std::string format_fixed(double value, int width, int decimals, std::string_view name) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*f", width, decimals, value);
  if (static_cast<int>(std::char_traits<char>::length(buf)) != width) {
    throw TleError(ErrorCode::FieldOverflow, "field overflow: " + std::string(name));
  }
  return buf;
}

std::string format_int(long value, int width, std::string_view name) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%*ld", width, value);
  if (value < 0 || static_cast<int>(std::char_traits<char>::length(buf)) != width) {
    throw TleError(ErrorCode::FieldOverflow, "field overflow: " + std::string(name));
  }
  return buf;
}

void check_line(std::string_view line, char number) {
  if (line.size() != kLineLength) {
    throw TleError(ErrorCode::BadLength, "line " + std::string(1, number) + " has " + std::to_string(line.size()) +
                                             " characters, expected 69");
  }
  if (line[0] != number || line[1] != ' ') {
    throw TleError(ErrorCode::BadLineNumber, "expected line number " + std::string(1, number));
  }
  const char expected = static_cast<char>('0' + checksum(line));
  if (line[68] != expected) {
    throw TleError(ErrorCode::BadChecksum, "checksum mismatch on line " + std::string(1, number) + ": found '" +
                                               std::string(1, line[68]) + "', computed '" +
                                               std::string(1, expected) + "'",
                   69, 69);
  }
}

double reduce_angle(double rad) {
  double r = std::fmod(rad, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

}  // namespace

int checksum(std::string_view line) {
  int sum = 0;
  const std::size_t n = std::min<std::size_t>(line.size(), 68);
  for (std::size_t i = 0; i < n; ++i) {
    const char c = line[i];
    if (c >= '0' && c <= '9') sum += c - '0';
    else if (c == '-') sum += 1;
  }
  return sum % 10;
}

int expand_two_digit_year(int yy) { return yy < 57 ? 2000 + yy : 1900 + yy; }

int decode_norad(std::string_view field) {
  const std::string_view t = trim(field);
  if (t.empty()) field_error("catalog number", 3, 7);
  const char lead = t.front();
  if (lead >= 'A' && lead <= 'Z') {
    if (lead == 'I' || lead == 'O' || t.size() != 5) field_error("catalog number", 3, 7);
    int value = lead - 'A' + 10;
    if (lead > 'I') --value;
    if (lead > 'O') --value;
    return value * 10000 + to_int(t.substr(1), "catalog number", 4, 7);
  }
  return to_int(t, "catalog number", 3, 7);
}

JulianDate TleRecord::epoch() const { return julian_from_year_day(epoch_year, epoch_day); }

TleRecord parse_tle(std::string_view raw1, std::string_view raw2) {
  const std::string_view l1 = strip_trailing(raw1);
  const std::string_view l2 = strip_trailing(raw2);
  check_line(l1, '1');
  check_line(l2, '2');
  if (columns(l1, 3, 7) != columns(l2, 3, 7)) {
    throw TleError(ErrorCode::IdMismatch, "catalog numbers differ between lines", 3, 7);
  }

  TleRecord rec;
  rec.line1 = std::string(l1);
  rec.line2 = std::string(l2);
  rec.norad_field = std::string(columns(l1, 3, 7));
  rec.norad_id = decode_norad(rec.norad_field);
  rec.classification = l1[7];
  rec.intl_designator = std::string(trim(columns(l1, 10, 17)));
  rec.epoch_year = expand_two_digit_year(to_int(columns(l1, 19, 20), "epoch year", 19, 20));
  rec.epoch_day = to_double(columns(l1, 21, 32), "epoch day", 21, 32);
  try {
    (void)rec.epoch();
  } catch (const Error& e) {
    throw TleError(ErrorCode::BadDayOfYear, e.what(), 21, 32);
  }
  rec.n_dot = to_double(columns(l1, 34, 43), "mean motion derivative", 34, 43);
  rec.n_ddot = parse_exp_field(columns(l1, 45, 52), "mean motion second derivative", 45, 52);
  rec.bstar = parse_exp_field(columns(l1, 54, 61), "bstar", 54, 61);
  rec.ephemeris_type = l1[62] == ' ' ? '0' : l1[62];
  rec.element_set_no = to_int(columns(l1, 65, 68), "element set number", 65, 68, true);

  rec.inclination_deg = to_double(columns(l2, 9, 16), "inclination", 9, 16);
  rec.raan_deg = to_double(columns(l2, 18, 25), "right ascension", 18, 25);
  {
    const std::string_view ecc = trim(columns(l2, 27, 33));
    for (char c : ecc) {
      if (c < '0' || c > '9') field_error("eccentricity", 27, 33);
    }
    rec.eccentricity = to_double("0." + std::string(ecc), "eccentricity", 27, 33);
  }
  rec.arg_perigee_deg = to_double(columns(l2, 35, 42), "argument of perigee", 35, 42);
  rec.mean_anomaly_deg = to_double(columns(l2, 44, 51), "mean anomaly", 44, 51);
  rec.mean_motion_revday = to_double(columns(l2, 53, 63), "mean motion", 53, 63);
  rec.rev_number = to_int(columns(l2, 64, 68), "revolution number", 64, 68, true);

  if (rec.inclination_deg < 0.0 || rec.inclination_deg > 180.0) field_error("inclination", 9, 16);
  if (rec.eccentricity < 0.0 || rec.eccentricity >= 1.0) field_error("eccentricity", 27, 33);
  return rec;
}

std::pair<std::string, std::string> format_tle(const TleRecord& rec) {
  if (rec.norad_field.size() != 5) throw TleError(ErrorCode::FieldOverflow, "field overflow: catalog number");
  if (rec.intl_designator.size() > 8) {
    throw TleError(ErrorCode::FieldOverflow, "field overflow: international designator");
  }
  std::string l1;
  l1.reserve(kLineLength);
  l1 += "1 ";
  l1 += rec.norad_field;
  l1 += rec.classification;
  l1 += ' ';
  l1 += rec.intl_designator;
  l1.append(8 - rec.intl_designator.size(), ' ');
  l1 += ' ';
  {
    char yy[4];
    std::snprintf(yy, sizeof yy, "%02d", rec.epoch_year % 100);
    l1 += yy;
  }
  {
    char day[32];
    std::snprintf(day, sizeof day, "%012.8f", rec.epoch_day);
    if (std::char_traits<char>::length(day) != 12) throw TleError(ErrorCode::FieldOverflow, "field overflow: epoch day");
    l1 += day;
  }
  l1 += ' ';
  {
    if (std::fabs(rec.n_dot) >= 1.0) throw TleError(ErrorCode::FieldOverflow, "field overflow: n_dot");
    char nd[32];
    std::snprintf(nd, sizeof nd, "%.8f", std::fabs(rec.n_dot));
    if (nd[0] != '0') throw TleError(ErrorCode::FieldOverflow, "field overflow: n_dot");
    l1 += rec.n_dot < 0 ? '-' : ' ';
    l1 += nd + 1;
  }
  l1 += ' ';
  l1 += format_exp_field(rec.n_ddot, "n_ddot");
  l1 += ' ';
  l1 += format_exp_field(rec.bstar, "bstar");
  l1 += ' ';
  l1 += rec.ephemeris_type;
  l1 += ' ';
  l1 += format_int(rec.element_set_no, 4, "element set number");
  l1 += static_cast<char>('0' + checksum(l1));

  std::string l2;
  l2.reserve(kLineLength);
  l2 += "2 ";
  l2 += rec.norad_field;
  l2 += ' ';
  l2 += format_fixed(rec.inclination_deg, 8, 4, "inclination");
  l2 += ' ';
  l2 += format_fixed(rec.raan_deg, 8, 4, "right ascension");
  l2 += ' ';
  {
    if (rec.eccentricity < 0.0 || rec.eccentricity >= 1.0) {
      throw TleError(ErrorCode::FieldOverflow, "field overflow: eccentricity");
    }
    const long digits = std::lround(rec.eccentricity * 1e7);
    if (digits > 9999999) throw TleError(ErrorCode::FieldOverflow, "field overflow: eccentricity");
    char ecc[24];
    std::snprintf(ecc, sizeof ecc, "%07ld", digits);
    l2 += ecc;
  }
  l2 += ' ';
  l2 += format_fixed(rec.arg_perigee_deg, 8, 4, "argument of perigee");
  l2 += ' ';
  l2 += format_fixed(rec.mean_anomaly_deg, 8, 4, "mean anomaly");
  l2 += ' ';
  l2 += format_fixed(rec.mean_motion_revday, 11, 8, "mean motion");
  l2 += format_int(rec.rev_number, 5, "revolution number");
  l2 += static_cast<char>('0' + checksum(l2));
  return {l1, l2};
}

std::vector<TleRecord> parse_tle_stream(std::istream& in) {
  std::vector<TleRecord> out;
  std::string line;
  int line_no = 0;
  std::string pending_name;
  std::string first;
  int first_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view s = strip_trailing(line);
    if (s.empty() || s.front() == '#') continue;
    if (first.empty()) {
      if (s.front() == '1' && s.size() > 1 && s[1] == ' ') {
        first = std::string(s);
        first_no = line_no;
      } else if (s.front() == '2' && s.size() > 1 && s[1] == ' ') {
        TleError err(ErrorCode::BadLineNumber, "line 2 without preceding line 1");
        err.set_line_number(line_no);
        throw err;
      } else {
        pending_name = std::string(trim(s));
      }
      continue;
    }
    try {
      check_line(strip_trailing(first), '1');
    } catch (TleError& e) {
      e.set_line_number(first_no);
      throw;
    }
    try {
      TleRecord rec = parse_tle(first, s);
      rec.name = pending_name;
      out.push_back(std::move(rec));
    } catch (TleError& e) {
      e.set_line_number(line_no);
      throw;
    }
    first.clear();
    pending_name.clear();
  }
  if (!first.empty()) {
    TleError err(ErrorCode::BadLength, "record truncated after line 1");
    err.set_line_number(first_no);
    throw err;
  }
  return out;
}

ElementSet to_elements(const TleRecord& rec) {
  ElementSet el;
  el.no_kozai = rec.mean_motion_revday * kTwoPi / kMinutesPerDay;
  el.ecco = rec.eccentricity;
  el.inclo = rec.inclination_deg * kDegToRad;
  el.nodeo = reduce_angle(rec.raan_deg * kDegToRad);
  el.argpo = reduce_angle(rec.arg_perigee_deg * kDegToRad);
  el.mo = reduce_angle(rec.mean_anomaly_deg * kDegToRad);
  el.bstar = rec.bstar;
  el.ndot = rec.n_dot * kTwoPi / (kMinutesPerDay * kMinutesPerDay);
  el.nddot = rec.n_ddot * kTwoPi / (kMinutesPerDay * kMinutesPerDay * kMinutesPerDay);
  el.epoch = rec.epoch();
  return el;
}

TleRecord with_elements(const TleRecord& templ, const ElementSet& el) {
  TleRecord rec = templ;
  rec.mean_motion_revday = el.no_kozai * kMinutesPerDay / kTwoPi;
  rec.eccentricity = el.ecco;
  rec.inclination_deg = el.inclo / kDegToRad;
  rec.raan_deg = reduce_angle(el.nodeo) / kDegToRad;
  rec.arg_perigee_deg = reduce_angle(el.argpo) / kDegToRad;
  rec.mean_anomaly_deg = reduce_angle(el.mo) / kDegToRad;
  // 359.99996 would print as 360.0000 and overflow the field.
  for (double* deg : {&rec.raan_deg, &rec.arg_perigee_deg, &rec.mean_anomaly_deg}) {
    if (*deg >= 359.99995) *deg = 0.0;
  }
  rec.bstar = el.bstar;
  rec.n_dot = el.ndot * (kMinutesPerDay * kMinutesPerDay) / kTwoPi;
  rec.n_ddot = el.nddot * (kMinutesPerDay * kMinutesPerDay * kMinutesPerDay) / kTwoPi;
  const auto [year, day] = year_day_from_julian(el.epoch);
  rec.epoch_year = year;
  rec.epoch_day = day;
  auto [l1, l2] = format_tle(rec);
  rec.line1 = std::move(l1);
  rec.line2 = std::move(l2);
  return rec;
}

EpochUtc epoch_to_utc(const TleRecord& rec) {
  const JulianDate jd = rec.epoch();
  return {to_calendar(jd), jd};
}

}  // namespace dsgp4kit
