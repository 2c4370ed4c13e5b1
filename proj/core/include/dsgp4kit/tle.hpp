#pragma once

#include <array>
#include <iosfwd>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dsgp4kit/error.hpp"
#include "dsgp4kit/time.hpp"

namespace dsgp4kit {

/// Parse failure carrying the 1-based line number within a file (0 if not
/// applicable) and, for field errors, the 1-based column range.
class TleError : public Error {
 public:
  TleError(ErrorCode code, const std::string& what, int first_col = 0, int last_col = 0)
      : Error(code, what), first_col_(first_col), last_col_(last_col) {}

  [[nodiscard]] int first_column() const noexcept { return first_col_; }
  [[nodiscard]] int last_column() const noexcept { return last_col_; }
  [[nodiscard]] int line_number() const noexcept { return line_; }
  void set_line_number(int line) noexcept { line_ = line; }

 private:
  int first_col_;
  int last_col_;
  int line_ = 0;
};

/// Two-line element set as written in the catalog format. Values are kept in
/// catalog units (degrees, rev/day) so formatting reproduces the text.
struct TleRecord {
  std::string name;
  std::string norad_field;  ///< columns 3-7 verbatim; may be Alpha-5
  int norad_id = 0;
  char classification = 'U';
  std::string intl_designator;
  int epoch_year = 2000;  ///< four-digit
  double epoch_day = 1.0;
  double n_dot = 0.0;   ///< rev/day^2, divided by 2 as stored
  double n_ddot = 0.0;  ///< rev/day^3, divided by 6 as stored
  double bstar = 0.0;   ///< 1/earth radii
  char ephemeris_type = '0';
  int element_set_no = 0;
  double inclination_deg = 0.0;
  double raan_deg = 0.0;
  double eccentricity = 0.0;
  double arg_perigee_deg = 0.0;
  double mean_anomaly_deg = 0.0;
  double mean_motion_revday = 0.0;
  int rev_number = 0;
  std::string line1;
  std::string line2;

  [[nodiscard]] JulianDate epoch() const;
};

/// Mean elements in propagation units. Templated so the propagator can run on
/// jets; `ElementSet` is the plain double form.
template <typename T>
struct BasicElements {
  T no_kozai{};  ///< rad/min
  T ecco{};
  T inclo{};  ///< rad
  T nodeo{};
  T argpo{};
  T mo{};
  T bstar{};  ///< 1/earth radii
  T ndot{};   ///< rad/min^2
  T nddot{};  ///< rad/min^3
  JulianDate epoch{};
};
using ElementSet = BasicElements<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kMinutesPerDay = 1440.0;

/// Mod-10 checksum over the first 68 characters: digits count their value,
/// '-' counts 1.
int checksum(std::string_view line);

TleRecord parse_tle(std::string_view line1, std::string_view line2);
std::pair<std::string, std::string> format_tle(const TleRecord& rec);

/// Reads 2-line or 3-line (name + 2 lines) records; blank lines and lines
/// starting with '#' are skipped. Errors carry the offending line number.
std::vector<TleRecord> parse_tle_stream(std::istream& in);

ElementSet to_elements(const TleRecord& rec);
/// Copies `elements` into a catalog record (angles in degrees, epoch as
/// year/day) keeping the template's identifiers and drag-rate fields, then
/// regenerates both lines.
TleRecord with_elements(const TleRecord& templ, const ElementSet& elements);

struct EpochUtc {
  CalendarTime utc;
  JulianDate jd;
};
EpochUtc epoch_to_utc(const TleRecord& rec);

/// 2-digit catalog years: 57-99 -> 1957-1999, 00-56 -> 2000-2056.
int expand_two_digit_year(int yy);

/// Alpha-5 aware decode of the 5-column catalog number field.
int decode_norad(std::string_view field);

}  // namespace dsgp4kit
