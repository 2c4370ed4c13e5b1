#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "test_support.hpp"

using namespace dsgp4kit;
using namespace dsgp4kit::testing;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("dsgp4kit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

EphemerisSeries series_at(const TleRecord& t, std::initializer_list<double> minutes) {
  EphemerisSeries s;
  s.norad_id = t.norad_id;
  const Model m = initialize(to_elements(t));
  for (double mm : minutes) {
    EphemerisRow r;
    r.epoch = add_minutes(t.epoch(), mm);
    r.state = state_vector(propagate(m, mm));
    s.rows.push_back(r);
  }
  return s;
}

}  // namespace

TEST(TleFiles, EmptyFileAndNames) {
  const std::string dir = temp_dir("tlefiles");
  write_file(dir + "/empty.tle", "");
  EXPECT_TRUE(load_tle_file(dir + "/empty.tle").empty());
  const auto fx = fixtures();
  EXPECT_EQ(fx[0].name, "ISS (ZARYA)");
  write_tle_file(dir + "/out.tle", fx);
  const auto back = load_tle_file(dir + "/out.tle");
  ASSERT_EQ(back.size(), fx.size());
  for (std::size_t i = 0; i < fx.size(); ++i) {
    EXPECT_EQ(back[i].name, fx[i].name);
    EXPECT_EQ(back[i].line1, fx[i].line1);
  }
  try {
    (void)load_tle_file(dir + "/missing.tle");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(Ephemeris, ParseAndRoundTrip) {
  std::stringstream in(
      "# norad_id=40697\n# name=SENTINEL-2A\n# resolution_s=60\n"
      "epoch_iso,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms\n"
      "2022-06-09T00:00:00Z,1,2,3,4,5,6\n"
      "2022-06-09T00:01:00Z,1.5,2,3,4,5,6\n");
  const EphemerisSeries s = parse_ephemeris_csv(in);
  EXPECT_EQ(s.norad_id, 40697);
  EXPECT_EQ(s.name, "SENTINEL-2A");
  EXPECT_EQ(s.resolution_s, 60.0);
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[1].state[0], 1.5);
  std::stringstream again(ephemeris_csv(s));
  const EphemerisSeries t = parse_ephemeris_csv(again);
  EXPECT_EQ(t.rows[1].state, s.rows[1].state);
  EXPECT_EQ(t.rows[1].epoch, s.rows[1].epoch);
}

TEST(Ephemeris, DecreasingEpochNamesTheRow) {
  std::stringstream in(
      "epoch_iso,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms\n"
      "2022-06-09T00:01:00Z,1,2,3,4,5,6\n"
      "2022-06-09T00:00:00Z,1,2,3,4,5,6\n");
  try {
    (void)parse_ephemeris_csv(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Ephemeris, ResolutionMismatchAndBadCells) {
  std::stringstream gap(
      "# resolution_s=60\nepoch_iso,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms\n"
      "2022-06-09T00:00:00Z,1,2,3,4,5,6\n2022-06-09T00:02:00Z,1,2,3,4,5,6\n");
  EXPECT_THROW((void)parse_ephemeris_csv(gap), Error);
  std::stringstream cell("epoch_iso,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms\n2022-06-09T00:00:00Z,1,x,3,4,5,6\n");
  EXPECT_THROW((void)parse_ephemeris_csv(cell), Error);
  std::stringstream header("epoch,x\n");
  EXPECT_THROW((void)parse_ephemeris_csv(header), Error);
}

TEST(Observations, CsvRoundTripWithWeights) {
  std::vector<Observation> obs(2);
  obs[0].epoch = julian_from_year_day(2022, 150.25);
  obs[0].state << 1, 2, 3, 4, 5, 6;
  obs[1].epoch = julian_from_year_day(2022, 151.5);
  obs[1].state << 7, 8, 9, 1, 2, 3;
  obs[1].weight = Vector6::Constant(0.5);
  std::stringstream in(observations_csv(obs));
  const auto back = parse_observations_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].state, obs[1].state);
  EXPECT_EQ(back[1].weight, obs[1].weight);
  EXPECT_NEAR(minutes_between(back[0].epoch, obs[0].epoch), 0.0, 1e-6);
  std::stringstream neg("epoch_iso,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms,weight\n2022-06-09T00:00:00Z,1,2,3,4,5,6,-1\n");
  EXPECT_THROW((void)parse_observations_csv(neg), Error);
}

TEST(SampleSets, CrossProductOfTlesAndTimestamps) {
  const TleRecord a = sentinel();
  const TleRecord b = parse_tle(kSentinelFitLine1, kSentinelFitLine2);  // same satellite, same epoch
  const TleRecord c = fixtures()[0];
  EphemerisSeries s = series_at(a, {10.0, 20.0, 30.0});
  const SampleSet set = build_sampleset({a, c}, {s, series_at(c, {5.0, 6.0, 7.0})});
  EXPECT_EQ(set.rows.size(), 6u);
  EXPECT_EQ(set.tles.size(), 2u);

  // Rows before a TLE epoch are not paired.
  const SampleSet early = build_sampleset({a}, {series_at(a, {-10.0, 0.0, 10.0})});
  EXPECT_EQ(early.rows.size(), 2u);

  EXPECT_THROW((void)build_sampleset({c}, {s}), Error);
  (void)b;
}

TEST(SampleSets, SplitFractionsAndHoldout) {
  const auto tles = synthetic_constellation(40, 3, julian_from_year_day(2024, 100.0), 535.0, 585.0);
  std::vector<EphemerisSeries> eph;
  for (const auto& t : tles) eph.push_back(series_at(t, {1440.0, 1441.0}));
  SplitOptions so;
  so.seed = 4;
  const SampleSet set = build_sampleset(tles, eph, so);
  std::array<int, 3> n{};
  for (Split s : set.tle_split) ++n[static_cast<int>(s)];
  EXPECT_NEAR(n[0], 0.69 * 40, 1.0);
  EXPECT_NEAR(n[1], 0.16 * 40, 1.0);
  EXPECT_NEAR(n[2], 0.15 * 40, 1.0);
  set.check_split_hygiene();

  so.altitude_holdout_km = 545.0;
  const SampleSet held = build_sampleset(tles, eph, so);
  int low = 0;
  for (std::size_t k = 0; k < held.tles.size(); ++k) {
    if (mean_altitude_km(held.tles[k]) < 545.0) {
      ++low;
      EXPECT_EQ(held.tle_split[k], Split::Test) << held.tles[k].norad_id;
    }
  }
  EXPECT_GT(low, 0);
  for (const auto& row : held.rows) {
    if (held.split_of(row) != Split::Test) {
      EXPECT_GE(mean_altitude_km(held.tles[row.tle]), 545.0);
    }
  }
}

TEST(SampleSets, SaveLoadVerifiesHashes) {
  const SampleSet set = make_ml_dataset(1, 4, 360);
  const std::string dir = temp_dir("cache");
  save_sampleset(set, dir, {});
  const SampleSet back = load_sampleset(dir);
  ASSERT_EQ(back.rows.size(), set.rows.size());
  EXPECT_EQ(back.tle_split, set.tle_split);
  for (std::size_t i = 0; i < set.rows.size(); i += 7) {
    EXPECT_EQ(back.rows[i].target, set.rows[i].target);
    EXPECT_EQ(back.rows[i].tsince_min, set.rows[i].tsince_min);
  }
  std::string csv = read_file(dir + "/samples.csv");
  csv[csv.size() / 2] = csv[csv.size() / 2] == '1' ? '2' : '1';
  write_file(dir + "/samples.csv", csv);
  EXPECT_THROW((void)load_sampleset(dir), Error);
}

TEST(Synthetic, ZeroPerturbationIsSgp4) {
  SynthConfig cfg;
  cfg.drift_km_per_day = 0.0;
  cfg.periodic_km = 0.0;
  cfg.horizon_days = 0.1;
  const TleRecord t = sentinel();
  const auto eph = synth_oracle({t}, cfg);
  ASSERT_EQ(eph.size(), 1u);
  for (const auto& row : eph[0].rows) {
    const StateTeme s = propagate(t, minutes_between(t.epoch(), row.epoch));
    const Vector6 x = state_vector(s);
    EXPECT_EQ(row.state.head<3>(), x.head<3>());
    // Velocity is the +-1 s central difference of SGP4 positions, which is
    // not exactly the SGP4 velocity output.
    const double ts = minutes_between(t.epoch(), row.epoch);
    const Vector6 up = state_vector(propagate(t, ts + 1.0 / 60.0));
    const Vector6 dn = state_vector(propagate(t, ts - 1.0 / 60.0));
    EXPECT_LT((row.state.tail<3>() - (up.head<3>() - dn.head<3>()) / 2.0).norm(), 1e-12);
    EXPECT_LT((row.state.tail<3>() - x.tail<3>()).norm(), 1e-4);
  }
}

TEST(Synthetic, DriftGrowsLinearly) {
  SynthConfig cfg;
  cfg.drift_km_per_day = 0.5;
  cfg.periodic_km = 0.0;
  cfg.start_offset_days = 2.0;
  cfg.horizon_days = 0.0;
  const TleRecord t = sentinel();
  const auto eph = synth_oracle({t}, cfg);
  ASSERT_EQ(eph[0].rows.size(), 1u);
  const StateTeme s = propagate(t, 2.0 * 1440.0);
  const double d = (eph[0].rows[0].state.head<3>() - state_vector(s).head<3>()).norm();
  EXPECT_NEAR(d, 1.0, 1e-6);
}

TEST(Synthetic, SeededAndReproducible) {
  const auto tles = synthetic_constellation(3, 5, julian_from_year_day(2024, 100.0));
  SynthConfig cfg;
  cfg.horizon_days = 0.05;
  cfg.noise_position_km = 0.1;
  cfg.seed = 9;
  const auto a = synth_oracle(tles, cfg);
  const auto b = synth_oracle(tles, cfg);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(ephemeris_csv(a[i]), ephemeris_csv(b[i]));
  cfg.seed = 10;
  EXPECT_NE(ephemeris_csv(synth_oracle(tles, cfg)[0]), ephemeris_csv(a[0]));

  EXPECT_EQ(synthetic_constellation(3, 5, julian_from_year_day(2024, 100.0))[2].line2, tles[2].line2);
}

TEST(Synthetic, ConstellationAltitudeRange) {
  const auto tles = synthetic_constellation(25, 2, julian_from_year_day(2024, 100.0), 535.0, 585.0);
  std::set<int> ids;
  for (const auto& t : tles) {
    const double h = mean_altitude_km(t);
    EXPECT_GE(h, 534.9);
    EXPECT_LE(h, 585.1);
    EXPECT_NEAR(t.inclination_deg, 53.0, 0.06);
    EXPECT_LT(t.eccentricity, 1e-3);
    ids.insert(t.norad_id);
  }
  EXPECT_EQ(ids.size(), 25u);
}

TEST(Hashing, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}
