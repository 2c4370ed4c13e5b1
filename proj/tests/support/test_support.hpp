#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dsgp4kit/data_io.hpp"
#include "dsgp4kit/orbit_determination.hpp"

#ifndef DSGP4KIT_TEST_DATA
#error "DSGP4KIT_TEST_DATA must point at tests/data"
#endif

namespace dsgp4kit::testing {

inline std::string data_path(const std::string& name) { return std::string(DSGP4KIT_TEST_DATA) + "/" + name; }

// Sentinel-2A nominal TLE and a fitted TLE for the same epoch. The fitted
// line 1 circulates with the nominal checksum digit; kSentinelFitLine1 fixes it.
inline constexpr const char* kSentinelLine1 = "1 40697U 15028A   22159.89292057  .00000111  00000-0  59112-4 0  9998";
inline constexpr const char* kSentinelLine2 = "2 40697  98.5685 234.7917 0000491 348.2227 119.9277 14.31085333362518";
inline constexpr const char* kSentinelFitLine1Printed = "1 40697U 15028A   22159.89292057  .00000111  00000-0 -19814-4 0  9998";
inline constexpr const char* kSentinelFitLine1 = "1 40697U 15028A   22159.89292057  .00000111  00000-0 -19814-4 0  9994";
inline constexpr const char* kSentinelFitLine2 = "2 40697  98.5716 234.7932 0000011 348.1175 120.0022 14.30817171362512";

inline TleRecord sentinel() { return parse_tle(kSentinelLine1, kSentinelLine2); }

inline std::vector<TleRecord> fixtures() { return load_tle_file(data_path("fixtures.tle")); }

struct OracleRow {
  std::string name;
  int norad = 0;
  double tsince = 0.0;
  Vector6 state = Vector6::Zero();
};

// Columns: name,norad,tsince_min,x..vz. Names never contain commas.
inline std::vector<OracleRow> oracle_rows() {
  std::ifstream in(data_path("oracle_states.csv"));
  std::vector<OracleRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    OracleRow r;
    std::getline(ss, r.name, ',');
    std::getline(ss, cell, ',');
    r.norad = std::stoi(cell);
    std::getline(ss, cell, ',');
    r.tsince = std::stod(cell);
    for (int k = 0; k < 6; ++k) {
      std::getline(ss, cell, ',');
      r.state[k] = std::stod(cell);
    }
    rows.push_back(r);
  }
  return rows;
}

/// Synthetic orbit-determination arc: the truth TLE sits at the target
/// epoch t_T and 26 observations cover [t_T - 7 d, t_T]. The initial guess is
/// the averaged state of 26 catalog-accuracy pseudo TLEs (one per
/// observation epoch), offset by de = 1e-4 and dM = 0.01 rad.
struct OdScenario {
  TleRecord truth;
  ElementSet truth_elements;
  std::vector<Observation> obs;
  std::vector<TleRecord> pseudo_tles;
  FitState initial;
};

inline OdScenario make_od_scenario(const TleRecord& truth, double sigma_km, double sigma_kms, std::uint64_t seed) {
  OdScenario s;
  s.truth = truth;
  s.truth_elements = to_elements(truth);
  const Model m = initialize(s.truth_elements);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  constexpr int kObs = 26;
  constexpr double kArcMin = 7.0 * 1440.0;
  for (int i = 0; i < kObs; ++i) {
    const double t = -kArcMin + i * kArcMin / (kObs - 1);
    Observation o;
    o.epoch = add_minutes(s.truth_elements.epoch, t);
    const Vector6 x = state_vector(propagate(m, t));
    o.state = x;
    for (int c = 0; c < 3; ++c) o.state[c] += sigma_km * g(rng);
    for (int c = 3; c < 6; ++c) o.state[c] += sigma_kms * g(rng);
    s.obs.push_back(o);

    // ~1 km-equivalent element scatter of an independent catalog TLE.
    FitState ps = state_to_tle(x, o.epoch, truth);
    ElementSet& e = ps.elements;
    e.no_kozai *= 1.0 + 7e-7 * g(rng);
    e.ecco = std::abs(e.ecco + 1.4e-4 * g(rng));
    e.inclo += 1.4e-4 * g(rng);
    e.nodeo += 1.4e-4 * g(rng);
    e.mo += 1.4e-4 * g(rng);
    s.pseudo_tles.push_back(ps.to_tle());
  }
  s.initial = initial_guess_from_tles(s.pseudo_tles, s.truth_elements.epoch);
  s.initial.elements.ecco += 1e-4;
  s.initial.elements.mo += 0.01;
  return s;
}

/// Relative element error, max over the free set.
inline double max_relative_element_error(const ElementSet& a, const ElementSet& truth, const FreeParamSet& free) {
  double worst = 0.0;
  for (int k = 0; k < free.size(); ++k) {
    const double t = element_value(truth, free[k]);
    const double d = std::abs(element_value(a, free[k]) - t);
    worst = std::max(worst, t == 0.0 ? d : d / std::abs(t));
  }
  return worst;
}

/// Synthetic constellation dataset: 20 satellites, 3 days at 60 s,
/// TLE-level 69/16/15 split with the 539 km holdout.
inline SampleSet make_ml_dataset(std::uint64_t seed, int satellites = 20, int stride = 1) {
  const auto tles = synthetic_constellation(satellites, seed, julian_from_year_day(2024, 100.0), 535.0, 585.0);
  auto eph = synth_oracle(tles);
  if (stride > 1) {
    for (auto& e : eph) {
      std::vector<EphemerisRow> kept;
      for (std::size_t k = 0; k < e.rows.size(); k += static_cast<std::size_t>(stride)) kept.push_back(e.rows[k]);
      e.rows = std::move(kept);
      e.resolution_s *= stride;
    }
  }
  SplitOptions so;
  so.seed = seed + 2;
  so.altitude_holdout_km = 539.0;
  return build_sampleset(tles, eph, so);
}

}  // namespace dsgp4kit::testing
