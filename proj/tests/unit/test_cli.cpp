#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "dsgp4kit/covariance.hpp"
#include "test_support.hpp"

using namespace dsgp4kit;
using namespace dsgp4kit::testing;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dsgp4kit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_dir(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("dsgp4kit_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> v;
  std::stringstream ss(s);
  std::string l;
  while (std::getline(ss, l)) v.push_back(l);
  return v;
}

// Shared tiny dataset for train/evaluate.
const std::string& dataset_dir() {
  static const std::string dir = [] {
    const std::string d = temp_dir("data");
    const CliRun r = invoke({"--seed", "3", "dataset", "--synthetic", "6", "--out", d, "--holdout-km", "539"});
    EXPECT_EQ(r.code, 0) << r.err;
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Cli, HelpExitsZeroEverywhere) {
  for (const char* sub : {"", "propagate", "batch", "jacobian", "covariance", "fit", "state2tle", "dataset", "train",
                          "evaluate", "bench"}) {
    std::vector<std::string> args;
    if (*sub != '\0') args.push_back(sub);
    args.push_back("--help");
    const CliRun r = invoke(args);
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kUsage);
  EXPECT_EQ(invoke({"propagate"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"--format", "xml", "propagate", "--tle", data_path("fixtures.tle")}).code, cli::kUsage);
}

TEST(Cli, PropagateEqualsLibrary) {
  const CliRun r = invoke({"propagate", "--tle", data_path("fixtures.tle"), "--minutes", "0,720.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  const auto fx = fixtures();
  ASSERT_EQ(lines.size(), 1 + 2 * fx.size());
  EXPECT_EQ(lines[0], "norad_id,tsince_min,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms,error");
  std::size_t row = 1;
  for (const auto& t : fx) {
    for (double m : {0.0, 720.5}) {
      const StateTeme s = propagate(t, m);
      std::string want = std::to_string(t.norad_id) + "," + fmt17(m);
      for (double v : s.position_km) want += "," + fmt17(v);
      for (double v : s.velocity_kms) want += "," + fmt17(v);
      want += ",";
      EXPECT_EQ(lines[row++], want);
    }
  }
}

TEST(Cli, BatchGridMatchesPropagate) {
  const CliRun a = invoke({"--workers", "3", "batch", "--tle", data_path("fixtures.tle"), "--grid", "0:60:30"});
  const CliRun b = invoke({"propagate", "--tle", data_path("fixtures.tle"), "--minutes", "0,30,60"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(invoke({"batch", "--tle", data_path("fixtures.tle"), "--grid", "5:1:1"}).code, cli::kUsage);
}

TEST(Cli, BadChecksumExits65WithLine) {
  const std::string dir = temp_dir("bad");
  write_file(dir + "/bad.tle", std::string("SENTINEL\n") + kSentinelFitLine1Printed + "\n" + kSentinelFitLine2 + "\n");
  const CliRun r = invoke({"propagate", "--tle", dir + "/bad.tle"});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("checksum"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(Cli, ItemErrorsExit2) {
  const std::string dir = temp_dir("item");
  TleRecord t = sentinel();
  ElementSet e = to_elements(t);
  e.no_kozai = 2.0 * kTwoPi / 1440.0;  // deep space
  write_tle_file(dir + "/mixed.tle", {t, with_elements(t, e)});
  const CliRun r = invoke({"propagate", "--tle", dir + "/mixed.tle"});
  EXPECT_EQ(r.code, cli::kItemErrors);
  EXPECT_NE(r.out.find("deep_space"), std::string::npos) << r.out;
}

TEST(Cli, JacobianCsvEqualsLibrary) {
  const CliRun r = invoke({"jacobian", "--tle", data_path("fixtures.tle"), "--minutes", "100", "--params", "n,e,bstar"});
  ASSERT_EQ(r.code, 0) << r.err;
  const FreeParamSet p = FreeParamSet::parse("n,e,bstar");
  EXPECT_EQ(r.out, jacobian_csv(jacobian(to_elements(fixtures()[0]), p, 100.0), p));
  EXPECT_EQ(invoke({"jacobian", "--tle", data_path("fixtures.tle"), "--params", "q"}).code, cli::kUsage);
}

TEST(Cli, CovarianceWritesJson) {
  const std::string dir = temp_dir("cov");
  Covariance c;
  c.matrix = Eigen::MatrixXd::Identity(6, 6) * 1e-10;
  write_file(dir + "/p0.json", covariance_to_json(c));
  const CliRun r = invoke({"covariance", "--tle", data_path("fixtures.tle"), "--cov", dir + "/p0.json", "--minutes", "60",
                     "--out", dir + "/pt.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Covariance pt = covariance_from_json(read_file(dir + "/pt.json"));
  EXPECT_EQ(pt.basis, Basis::CartesianTeme);
  const Covariance ref = propagate_covariance(c, to_elements(fixtures()[0]), 60.0);
  EXPECT_LT((pt.matrix - ref.matrix).norm(), 1e-15 * ref.matrix.norm() + 1e-30);

  c.matrix(0, 0) = -1.0;
  write_file(dir + "/bad.json", covariance_to_json(c));
  EXPECT_EQ(invoke({"covariance", "--tle", data_path("fixtures.tle"), "--cov", dir + "/bad.json"}).code, cli::kData);
}

TEST(Cli, FitFromObservations) {
  const std::string dir = temp_dir("fit");
  const OdScenario s = make_od_scenario(sentinel(), 0.0, 0.0, 31);
  write_file(dir + "/obs.csv", observations_csv(s.obs));
  write_tle_file(dir + "/init.tle", {s.initial.to_tle()});
  const std::string target = format_iso8601(s.truth_elements.epoch, 9);
  const CliRun r = invoke({"fit", "--obs", dir + "/obs.csv", "--target-epoch", target, "--initial", dir + "/init.tle",
                     "--report", dir + "/rep.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_GE(lines.size(), 3u);
  const TleRecord fitted = parse_tle(lines[0], lines[1]);
  EXPECT_LE(max_relative_element_error(to_elements(fitted), s.truth_elements, FreeParamSet::elements6()), 1e-6);
  EXPECT_TRUE(fs::exists(dir + "/rep.json"));

  const CliRun nc = invoke({"fit", "--obs", dir + "/obs.csv", "--target-epoch", target, "--initial", dir + "/init.tle",
                      "--report", dir + "/rep2.json", "--max-iter", "1"});
  EXPECT_EQ(nc.code, cli::kNonConvergence);
}

TEST(Cli, State2TleRoundTrip) {
  const std::string dir = temp_dir("s2t");
  write_tle_file(dir + "/t.tle", {sentinel()});
  const StateTeme s = propagate(sentinel(), 0.0);
  std::string state;
  for (double v : s.position_km) state += fmt17(v) + ",";
  for (double v : s.velocity_kms) state += fmt17(v) + ",";
  state.pop_back();
  const CliRun r = invoke({"state2tle", "--state", state, "--epoch", format_iso8601(sentinel().epoch(), 9), "--template",
                     dir + "/t.tle"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  const TleRecord t = parse_tle(lines[0], lines[1]);
  EXPECT_EQ(t.norad_id, 40697);
  EXPECT_NEAR(t.mean_motion_revday, 14.31085333, 1e-6);
}

TEST(Cli, TrainZeroEpochsWritesInitialModel) {
  const std::string dir = temp_dir("train");
  const CliRun r = invoke({"--seed", "4", "train", "--data", dataset_dir(), "--out", dir + "/m.json", "--epochs", "0",
                     "--hidden", "8,8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const SampleSet set = load_sampleset(dataset_dir());
  HybridConfig hc;
  hc.seed = 4;
  hc.input_hidden = {8, 8};
  hc.output_hidden = {8, 8};
  const HybridModel init = HybridModel::create(hc, fit_normalization(set));
  EXPECT_EQ(read_file(dir + "/m.json"), checkpoint_json(init) + "\n");
}

TEST(Cli, EvaluateIdentityCheckpointEqualsBaseline) {
  const std::string dir = temp_dir("eval");
  ASSERT_EQ(invoke({"train", "--data", dataset_dir(), "--out", dir + "/m.json", "--epochs", "0", "--hidden", "4"}).code, 0);
  const CliRun r = invoke({"evaluate", "--data", dataset_dir(), "--model", dir + "/m.json", "--split", "test"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1].substr(lines[1].find(',')), lines[2].substr(lines[2].find(',')));
}

TEST(Cli, TrainFewEpochsAndHistory) {
  const std::string dir = temp_dir("train2");
  const CliRun r = invoke({"--workers", "2", "train", "--data", dataset_dir(), "--out", dir + "/m.json", "--epochs", "2",
                     "--hidden", "8", "--history", dir + "/h.csv", "--arch", "output-only"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_of(read_file(dir + "/h.csv")).size(), 4u);  // header, epoch 0, two epochs
  const HybridModel m = load_checkpoint(read_file(dir + "/m.json"));
  EXPECT_FALSE(m.config.use_input_net);
}

TEST(Cli, DatasetFromFiles) {
  const std::string dir = temp_dir("files");
  const auto tles = synthetic_constellation(3, 8, julian_from_year_day(2024, 100.0));
  write_tle_file(dir + "/t.tle", tles);
  SynthConfig sc;
  sc.horizon_days = 0.02;
  std::vector<std::string> args = {"dataset", "--tle", dir + "/t.tle", "--out", dir + "/cache", "--ephemeris"};
  int k = 0;
  for (const auto& e : synth_oracle(tles, sc)) {
    const std::string p = dir + "/e" + std::to_string(k++) + ".csv";
    write_file(p, ephemeris_csv(e));
    args.push_back(p);
  }
  const CliRun r = invoke(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("tles,3"), std::string::npos);
  EXPECT_EQ(load_sampleset(dir + "/cache").rows.size(), 3u * 29u);
  EXPECT_EQ(invoke({"dataset", "--out", dir + "/x"}).code, cli::kUsage);
}

TEST(Cli, BenchTwoSizesTwoRows) {
  const CliRun r = invoke({"bench", "--sizes", "10000,100000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1].substr(0, 6), "10000,");
  EXPECT_EQ(lines[2].substr(0, 7), "100000,");
}

TEST(Cli, ConfigFileSuppliesDefaults) {
  const std::string dir = temp_dir("config");
  write_file(dir + "/c.ini", "format=json\n");
  const CliRun r = invoke({"--config", dir + "/c.ini", "propagate", "--tle", data_path("fixtures.tle")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.front(), '[');
}
