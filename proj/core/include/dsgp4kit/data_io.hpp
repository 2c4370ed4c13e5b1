#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsgp4kit/hybrid.hpp"
#include "dsgp4kit/orbit_determination.hpp"

namespace dsgp4kit {

/// Throws Error(Io) when unreadable; parse errors are TleError with the line.
std::vector<TleRecord> load_tle_file(const std::string& path);
void write_tle_file(const std::string& path, const std::vector<TleRecord>& tles);

struct EphemerisRow {
  JulianDate epoch;
  Vector6 state = Vector6::Zero();  ///< km, km/s
};

struct EphemerisSeries {
  int norad_id = 0;
  std::string name;
  double resolution_s = 0.0;  ///< 0 when undeclared
  std::vector<EphemerisRow> rows;
};

/// CSV "epoch_iso,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms". Leading "# key=value"
/// lines carry norad_id, name and resolution_s. Epochs must increase
/// strictly, and match resolution_s when it is declared. Errors are
/// Error(Parse) naming the line.
EphemerisSeries parse_ephemeris_csv(std::istream& in);
EphemerisSeries load_ephemeris_csv(const std::string& path);
std::string ephemeris_csv(const EphemerisSeries& s);

/// Observations CSV "epoch_iso,x_km,...,vz_kms[,weight]"; the optional
/// weight (>= 0) applies to all six components.
std::vector<Observation> parse_observations_csv(std::istream& in);
std::vector<Observation> load_observations_csv(const std::string& path);
std::string observations_csv(const std::vector<Observation>& obs);

struct SplitOptions {
  std::array<double, 3> fractions{0.69, 0.16, 0.15};
  std::uint64_t seed = 0;
  double altitude_holdout_km = 0.0;  ///< satellites below go to test; 0 disables
};

/// Mean altitude from the Kozai mean motion, km.
double mean_altitude_km(const TleRecord& tle, const GravityConstants& gc = GravityConstants::wgs72());

/// Every (TLE, timestamp) pair of a satellite with timestamp not before the
/// TLE epoch. Rows are ordered by catalog number, TLE epoch, timestamp.
/// Throws NoOverlap when no pair exists.
SampleSet build_sampleset(const std::vector<TleRecord>& tles, const std::vector<EphemerisSeries>& ephemerides,
                          const SplitOptions& opts = {});

struct SynthConfig {
  double start_offset_days = 1.0;  ///< ephemeris start after the TLE epoch
  double horizon_days = 3.0;
  double resolution_s = 60.0;
  double drift_km_per_day = 0.5;  ///< along-track, grows with time since epoch
  double periodic_km = 2.0;       ///< along-track, times sin(argument of latitude)
  double noise_position_km = 0.0;
  double noise_velocity_kms = 0.0;
  std::uint64_t seed = 0;
  GravityConstants gc = GravityConstants::wgs72();
};

/// Reference ephemerides: SGP4 plus a deterministic along-track term and
/// optional seeded noise.
std::vector<EphemerisSeries> synth_oracle(const std::vector<TleRecord>& truth, const SynthConfig& cfg = {});

/// Starlink-like shell: 53 deg inclination, near-circular orbits, mean
/// altitudes spread over `min_alt_km`..`max_alt_km`.
std::vector<TleRecord> synthetic_constellation(int count, std::uint64_t seed, const JulianDate& epoch,
                                               double min_alt_km = 520.0, double max_alt_km = 580.0);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Writes <dir>/samples.csv, <dir>/tles.tle and <dir>/manifest.json.
void save_sampleset(const SampleSet& set, const std::string& dir, const std::vector<std::string>& sources = {});
SampleSet load_sampleset(const std::string& dir);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace dsgp4kit
