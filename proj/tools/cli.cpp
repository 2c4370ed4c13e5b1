#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "dsgp4kit/batch.hpp"
#include "dsgp4kit/covariance.hpp"
#include "dsgp4kit/data_io.hpp"
#include "dsgp4kit/hybrid.hpp"
#include "dsgp4kit/orbit_determination.hpp"

namespace dsgp4kit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flag values that pass CLI11 but fail semantic checks.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_doubles(const std::string& list, const char* what) {
  std::vector<double> out;
  std::stringstream ss(list);
  for (std::string cell; std::getline(ss, cell, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad number '") + cell + "' in " + what);
    }
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> out;
  for (double v : parse_doubles(list, "--sizes")) {
    if (v < 1 || v != std::floor(v)) throw UsageError("--sizes entries must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// start:stop:step, inclusive of stop when it lands on the grid.
std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = parse_doubles([&] {
    std::string s = spec;
    std::replace(s.begin(), s.end(), ':', ',');
    return s;
  }(), "--grid");
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw UsageError("--grid expects start:stop:step with step > 0 and stop >= start");
  }
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) g.push_back(parts[0] + static_cast<double>(k) * parts[2]);
  return g;
}

GravityConstants gravity(const std::string& name) {
  if (name == "wgs72") return GravityConstants::wgs72();
  if (name == "wgs84") return GravityConstants::wgs84();
  throw UsageError("--grav must be wgs72 or wgs84");
}

std::vector<TleRecord> load_tles_nonempty(const std::string& path) {
  auto tles = load_tle_file(path);
  if (tles.empty()) throw Error(ErrorCode::Parse, "'" + path + "' holds no TLE records");
  return tles;
}

std::string csv_state_header() { return "norad_id,tsince_min,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms,error"; }

std::string csv_state_row(int norad, double t, const BatchCell& c) {
  std::string row = std::to_string(norad) + "," + fmt17(t);
  if (c.ok()) {
    for (int k = 0; k < 3; ++k) row += "," + fmt17(c.state->position_km[static_cast<std::size_t>(k)]);
    for (int k = 0; k < 3; ++k) row += "," + fmt17(c.state->velocity_kms[static_cast<std::size_t>(k)]);
    row += ",";
  } else {
    row += ",,,,,,," + std::string(to_string(c.error));
  }
  return row;
}

json json_state_row(int norad, double t, const BatchCell& c) {
  json j = {{"norad_id", norad}, {"tsince_min", t}};
  if (c.ok()) {
    j["position_km"] = c.state->position_km;
    j["velocity_kms"] = c.state->velocity_kms;
  } else {
    j["error"] = std::string(to_string(c.error));
  }
  return j;
}

// Models that fail initialization become rows of errors.
struct PreparedModels {
  std::vector<Model> models;
  std::vector<int> norad;
  std::vector<std::size_t> source;  ///< TLE index of each model
  std::vector<std::pair<std::size_t, ErrorCode>> failed;
};

PreparedModels prepare(const std::vector<TleRecord>& tles, const GravityConstants& gc) {
  PreparedModels p;
  for (std::size_t k = 0; k < tles.size(); ++k) {
    try {
      p.models.push_back(initialize(to_elements(tles[k]), gc));
      p.norad.push_back(tles[k].norad_id);
      p.source.push_back(k);
    } catch (const Error& e) {
      p.failed.emplace_back(k, e.code());
    }
  }
  return p;
}

int emit_states(const std::vector<TleRecord>& tles, const std::vector<double>& times, const GravityConstants& gc,
                int workers, bool sequential, const std::string& format, std::ostream& out) {
  PreparedModels p = prepare(tles, gc);
  BatchResult res;
  if (!p.models.empty()) {
    const BatchJob job = BatchJob::shared_grid(p.models, times);
    res = sequential ? run_sequential(job) : run_batch(job, workers);
  }
  // Rows in TLE file order.
  std::size_t errors = res.error_count;
  json arr = json::array();
  if (format == "csv") out << csv_state_header() << "\n";
  std::size_t m = 0;
  std::size_t f = 0;
  for (std::size_t k = 0; k < tles.size(); ++k) {
    const bool ok = m < p.source.size() && p.source[m] == k;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      BatchCell bad;
      if (!ok) bad.error = p.failed[f].second;
      const BatchCell& c = ok ? res.at(m, ti) : bad;
      if (!ok) ++errors;
      if (format == "csv") {
        out << csv_state_row(tles[k].norad_id, times[ti], c) << "\n";
      } else {
        arr.push_back(json_state_row(tles[k].norad_id, times[ti], c));
      }
    }
    if (ok) {
      ++m;
    } else {
      ++f;
    }
  }
  if (format == "json") out << arr.dump(1) << "\n";
  return errors > 0 ? kItemErrors : kOk;
}

void check_format(const std::string& f) {
  if (f != "csv" && f != "json") throw UsageError("--format must be csv or json");
}

std::string metrics_csv(const std::string& label, const Metrics& m) {
  return label + "," + fmt17(m.state_mse) + "," + fmt17(m.position_rmse_km) + "," + fmt17(m.velocity_rmse_kms) + "," +
         std::to_string(m.count) + "," + std::to_string(m.skipped) + "\n";
}

json metrics_json(const Metrics& m) {
  return {{"state_mse", m.state_mse},
          {"position_rmse_km", m.position_rmse_km},
          {"velocity_rmse_kms", m.velocity_rmse_kms},
          {"count", m.count},
          {"skipped", m.skipped}};
}

int exit_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::Io:
    case ErrorCode::Parse:
    case ErrorCode::NoOverlap:
    case ErrorCode::BadLength:
    case ErrorCode::BadChecksum:
    case ErrorCode::BadLineNumber:
    case ErrorCode::IdMismatch:
    case ErrorCode::UnparsableField:
    case ErrorCode::FieldOverflow:
    case ErrorCode::BadDayOfYear:
    case ErrorCode::NonPsdInput:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::SplitOverlap:
      return kData;
    case ErrorCode::NonConvergence:
    case ErrorCode::SingularNormalMatrix:
    case ErrorCode::KeplerNonConvergence:
    case ErrorCode::DivergedLoss:
      return kNonConvergence;
    case ErrorCode::InvalidArgument:
      return kUsage;
    default:
      return kItemErrors;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentiable SGP4 toolkit: propagation, Jacobians, orbit determination, hybrid ML propagator"};
  app.name("dsgp4kit");
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with flag defaults");
  int workers = default_workers();
  std::uint64_t seed = 0;
  std::string format = "csv";
  app.add_option("--workers", workers, "Worker threads (default: DSGP4KIT_WORKERS or hardware)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Seed for every random choice");
  app.add_option("--format", format, "Output format: csv or json");

  std::string tle_path, minutes = "0", grav = "wgs72", grid;

  // propagate
  auto* c_prop = app.add_subcommand("propagate", "Propagate every TLE in a file to the given minutes");
  c_prop->add_option("--tle", tle_path, "TLE file")->required();
  c_prop->add_option("--minutes", minutes, "Comma-separated minutes since epoch");
  c_prop->add_option("--grav", grav, "Gravity model: wgs72 or wgs84");

  // batch
  auto* c_batch = app.add_subcommand("batch", "Parallel propagation of TLEs over a shared time grid");
  c_batch->add_option("--tle", tle_path, "TLE file")->required();
  auto* o_grid = c_batch->add_option("--grid", grid, "start:stop:step in minutes");
  c_batch->add_option("--minutes", minutes, "Comma-separated minutes (when --grid is absent)")->excludes(o_grid);
  c_batch->add_option("--grav", grav, "Gravity model: wgs72 or wgs84");

  // jacobian
  std::string params = "n,e,i,raan,argp,ma,bstar,ndot,nddot";
  std::size_t index = 0;
  auto* c_jac = app.add_subcommand("jacobian", "Forward-mode Jacobian of the state wrt TLE parameters");
  c_jac->add_option("--tle", tle_path, "TLE file")->required();
  c_jac->add_option("--minutes", minutes, "Minutes since epoch (one value)");
  c_jac->add_option("--params", params, "Comma-separated parameters: n,e,i,raan,argp,ma,bstar,ndot,nddot");
  c_jac->add_option("--index", index, "Record index within the file");
  c_jac->add_option("--grav", grav, "Gravity model: wgs72 or wgs84");

  // covariance
  std::string cov_path, out_path;
  auto* c_cov = app.add_subcommand("covariance", "Map an element-basis covariance to TEME at a time");
  c_cov->add_option("--tle", tle_path, "TLE file")->required();
  c_cov->add_option("--cov", cov_path, "Covariance JSON in the tle-elements basis")->required();
  c_cov->add_option("--minutes", minutes, "Minutes since epoch (one value)");
  c_cov->add_option("--index", index, "Record index within the file");
  c_cov->add_option("--out", out_path, "Write JSON here instead of stdout");
  c_cov->add_option("--grav", grav, "Gravity model: wgs72 or wgs84");

  // fit
  std::string obs_path, target_epoch, free = "n,e,i,raan,argp,ma,bstar", weights, initial_path, report_path = "fit_report.json";
  int max_iter = 25;
  auto* c_fit = app.add_subcommand("fit", "Least-squares TLE fit to state observations");
  c_fit->add_option("--obs", obs_path, "Observations CSV or TLE file (pseudo-observations)")->required();
  c_fit->add_option("--target-epoch", target_epoch, "Epoch of the fitted TLE, ISO-8601")->required();
  c_fit->add_option("--free", free, "Free parameters");
  c_fit->add_option("--weights", weights, "Six per-component weights, overriding the file");
  c_fit->add_option("--initial", initial_path, "Initial-guess TLE (first record); default: averaged state");
  c_fit->add_option("--report", report_path, "Report JSON path");
  c_fit->add_option("--max-iter", max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  c_fit->add_option("--grav", grav, "Gravity model: wgs72 or wgs84");

  // state2tle
  std::string state, epoch_iso, template_path;
  auto* c_s2t = app.add_subcommand("state2tle", "Mean elements reproducing a TEME state");
  c_s2t->add_option("--state", state, "x,y,z,vx,vy,vz in km and km/s")->required();
  c_s2t->add_option("--epoch", epoch_iso, "State epoch, ISO-8601")->required();
  c_s2t->add_option("--template", template_path, "TLE supplying identifiers and drag terms")->required();
  c_s2t->add_option("--grav", grav, "Gravity model: wgs72 or wgs84");

  // dataset
  int synthetic = 0;
  std::vector<std::string> eph_paths;
  std::string out_dir, start_iso = "2024-04-09T00:00:00";
  double holdout = 0.0, noise_km = 0.0, noise_kms = 0.0;
  std::string fractions = "0.69,0.16,0.15";
  auto* c_data = app.add_subcommand("dataset", "Build a sample set cache from TLEs and ephemerides");
  c_data->add_option("--synthetic", synthetic, "Generate this many synthetic satellites instead of reading files");
  c_data->add_option("--tle", tle_path, "TLE file");
  c_data->add_option("--ephemeris", eph_paths, "Ephemeris CSV files");
  c_data->add_option("--out", out_dir, "Cache directory")->required();
  c_data->add_option("--holdout-km", holdout, "Satellites below this mean altitude go to test");
  c_data->add_option("--fractions", fractions, "train,valid,test fractions");
  c_data->add_option("--epoch", start_iso, "Synthetic TLE epoch, ISO-8601");
  c_data->add_option("--noise-km", noise_km, "Synthetic position noise sigma");
  c_data->add_option("--noise-kms", noise_kms, "Synthetic velocity noise sigma");

  // train
  std::string data_dir, model_path, init_path, history_path, arch = "hybrid", hidden, optimizer = "adam";
  int epochs = 30, batch_size = 256;
  double lr = 3e-3;
  bool learn_sgp4 = false;
  auto* c_train = app.add_subcommand("train", "Train a hybrid or output-only corrector");
  c_train->add_option("--data", data_dir, "Sample set cache directory")->required();
  c_train->add_option("--out", model_path, "Checkpoint JSON to write")->required();
  c_train->add_option("--init", init_path, "Start from this checkpoint");
  c_train->add_option("--history", history_path, "Training history CSV");
  c_train->add_option("--arch", arch, "hybrid or output-only");
  c_train->add_option("--hidden", hidden, "Hidden widths per network, e.g. 25,25,25");
  c_train->add_option("--epochs", epochs, "Epochs")->check(CLI::NonNegativeNumber);
  c_train->add_option("--batch-size", batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  c_train->add_option("--lr", lr, "Learning rate for every group")->check(CLI::PositiveNumber);
  c_train->add_option("--optimizer", optimizer, "adam or sgd");
  c_train->add_flag("--learn-sgp4", learn_sgp4, "Learn the B* offset and C1 scale");

  // evaluate
  std::string split = "test";
  auto* c_eval = app.add_subcommand("evaluate", "Metrics of a checkpoint (and plain SGP4) on a split");
  c_eval->add_option("--data", data_dir, "Sample set cache directory")->required();
  c_eval->add_option("--model", model_path, "Checkpoint JSON; omitted means plain SGP4");
  c_eval->add_option("--split", split, "train, valid or test");

  // bench
  std::string sizes = "10000,100000";
  int reps = 5;
  auto* c_bench = app.add_subcommand("bench", "Time batch propagation");
  c_bench->add_option("--sizes", sizes, "Comma-separated batch sizes");
  c_bench->add_option("--tle", tle_path, "TLE pool (default: a built-in LEO record)");
  c_bench->add_option("--reps", reps, "Repetitions per size (at least 5)")->check(CLI::PositiveNumber);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    check_format(format);
    const GravityConstants gc = gravity(grav);

    if (c_prop->parsed()) {
      return emit_states(load_tles_nonempty(tle_path), parse_doubles(minutes, "--minutes"), gc, workers, true, format, out);
    }
    if (c_batch->parsed()) {
      const auto times = grid.empty() ? parse_doubles(minutes, "--minutes") : parse_grid(grid);
      return emit_states(load_tles_nonempty(tle_path), times, gc, workers, false, format, out);
    }
    if (c_jac->parsed() || c_cov->parsed()) {
      const auto tles = load_tles_nonempty(tle_path);
      if (index >= tles.size()) throw UsageError("--index beyond the records in the file");
      const auto ts = parse_doubles(minutes, "--minutes");
      if (ts.size() != 1) throw UsageError("--minutes takes a single value here");
      const ElementSet el = to_elements(tles[index]);
      if (c_jac->parsed()) {
        const FreeParamSet fp = FreeParamSet::parse(params);
        const Sensitivity s = sensitivity(el, fp, ts[0], gc);
        if (format == "csv") {
          out << jacobian_csv(s.jacobian, fp);
        } else {
          json j = {{"norad_id", tles[index].norad_id}, {"tsince_min", ts[0]}, {"params", fp.to_string()}};
          j["state"] = std::vector<double>(state_vector(s.state).data(), state_vector(s.state).data() + 6);
          std::vector<std::vector<double>> rows(6);
          for (int r = 0; r < 6; ++r) {
            for (int c = 0; c < fp.size(); ++c) rows[static_cast<std::size_t>(r)].push_back(s.jacobian(r, c));
          }
          j["jacobian"] = rows;
          out << j.dump(1) << "\n";
        }
        return kOk;
      }
      const Covariance p0 = covariance_from_json(read_file(cov_path));
      const Covariance pt = propagate_covariance(p0, el, ts[0], gc);
      const std::string text = covariance_to_json(pt) + "\n";
      if (out_path.empty()) {
        out << text;
      } else {
        write_file(out_path, text);
      }
      return kOk;
    }
    if (c_fit->parsed()) {
      const JulianDate target = parse_iso8601(target_epoch);
      const bool tle_obs = fs::path(obs_path).extension() != ".csv";
      std::vector<TleRecord> obs_tles;
      std::vector<Observation> obs;
      if (tle_obs) {
        obs_tles = load_tles_nonempty(obs_path);
        obs = observations_from_tles(obs_tles, gc);
      } else {
        obs = load_observations_csv(obs_path);
      }
      if (obs.empty()) throw Error(ErrorCode::Parse, "no observations in '" + obs_path + "'");
      if (!weights.empty()) {
        const auto w = parse_doubles(weights, "--weights");
        if (w.size() != 6) throw UsageError("--weights takes six values");
        for (auto& o : obs) {
          for (int k = 0; k < 6; ++k) {
            if (w[static_cast<std::size_t>(k)] < 0.0) throw UsageError("weights must be non-negative");
            o.weight[k] = w[static_cast<std::size_t>(k)];
          }
        }
      }
      StateToTleConfig scfg;
      scfg.gc = gc;
      FitState init;
      if (!initial_path.empty()) {
        const TleRecord t0 = load_tles_nonempty(initial_path).front();
        if (minutes_between(t0.epoch(), target) != 0.0) {
          // Re-epoch the guess: its state at the target, inverted.
          init = state_to_tle(state_vector(propagate(t0, minutes_between(t0.epoch(), target), gc)), target, t0, scfg);
        } else {
          init.templ = t0;
          init.elements = to_elements(t0);
        }
      } else if (tle_obs) {
        init = initial_guess_from_tles(obs_tles, target, scfg);
      } else {
        throw UsageError("observation CSVs need --initial for identifiers and a starting guess");
      }
      init.free = FreeParamSet::parse(free);
      if (obs.size() * 6 < static_cast<std::size_t>(init.free.size())) {
        err << "warning: " << obs.size() * 6 << " residuals for " << init.free.size()
            << " free parameters; the problem is underdetermined and only damped steps are taken\n";
      }
      FitConfig fcfg;
      fcfg.max_iterations = max_iter;
      fcfg.workers = workers;
      fcfg.gc = gc;
      const FitResult fr = fit_tle(obs, init, fcfg);
      const TleRecord best = fr.state.to_tle();
      out << best.line1 << "\n" << best.line2 << "\n";
      write_file(report_path, fit_report_json(fr.report, fr.state) + "\n");
      out << "report: " << report_path << "\n";
      if (fr.report.rank_deficient) err << "warning: normal matrix was rank deficient; damping engaged\n";
      if (!fr.report.converged) {
        err << "fit did not converge: " << fr.report.reason << "\n";
        return kNonConvergence;
      }
      return kOk;
    }
    if (c_s2t->parsed()) {
      const auto s = parse_doubles(state, "--state");
      if (s.size() != 6) throw UsageError("--state takes six values");
      Vector6 v;
      for (int k = 0; k < 6; ++k) v[k] = s[static_cast<std::size_t>(k)];
      StateToTleConfig scfg;
      scfg.gc = gc;
      const FitState fs2 = state_to_tle(v, parse_iso8601(epoch_iso), load_tles_nonempty(template_path).front(), scfg);
      const TleRecord t = fs2.to_tle();
      out << t.line1 << "\n" << t.line2 << "\n";
      return kOk;
    }
    if (c_data->parsed()) {
      SplitOptions so;
      so.seed = seed;
      so.altitude_holdout_km = holdout;
      const auto fr = parse_doubles(fractions, "--fractions");
      if (fr.size() != 3) throw UsageError("--fractions takes three values");
      so.fractions = {fr[0], fr[1], fr[2]};
      std::vector<TleRecord> tles;
      std::vector<EphemerisSeries> eph;
      std::vector<std::string> sources;
      if (synthetic > 0) {
        if (!tle_path.empty() || !eph_paths.empty()) throw UsageError("--synthetic excludes --tle and --ephemeris");
        tles = synthetic_constellation(synthetic, seed, parse_iso8601(start_iso), 535.0, 585.0);
        SynthConfig sc;
        sc.seed = seed;
        sc.noise_position_km = noise_km;
        sc.noise_velocity_kms = noise_kms;
        eph = synth_oracle(tles, sc);
        std::error_code ec;
        fs::create_directories(fs::path(out_dir) / "source", ec);
        if (ec) throw Error(ErrorCode::Io, "cannot create '" + out_dir + "'");
        const std::string tp = (fs::path(out_dir) / "source" / "truth.tle").string();
        write_tle_file(tp, tles);
        sources.push_back(tp);
        for (const auto& e : eph) {
          const std::string ep = (fs::path(out_dir) / "source" / (std::to_string(e.norad_id) + ".csv")).string();
          write_file(ep, ephemeris_csv(e));
          sources.push_back(ep);
        }
      } else {
        if (tle_path.empty() || eph_paths.empty()) throw UsageError("dataset needs --synthetic N or --tle plus --ephemeris");
        tles = load_tles_nonempty(tle_path);
        sources.push_back(tle_path);
        for (const auto& p : eph_paths) {
          eph.push_back(load_ephemeris_csv(p));
          sources.push_back(p);
        }
      }
      const SampleSet set = build_sampleset(tles, eph, so);
      save_sampleset(set, out_dir, sources);
      std::array<std::size_t, 3> n{};
      for (Split s : set.tle_split) ++n[static_cast<std::size_t>(s)];
      out << "tles," << set.tles.size() << "\nrows," << set.rows.size() << "\ntrain_tles," << n[0] << "\nvalid_tles,"
          << n[1] << "\ntest_tles," << n[2] << "\n";
      return kOk;
    }
    if (c_train->parsed()) {
      const SampleSet set = load_sampleset(data_dir);
      HybridModel init;
      if (!init_path.empty()) {
        init = load_checkpoint(read_file(init_path));
      } else {
        HybridConfig hc;
        if (arch == "output-only") {
          hc = output_only_config(seed);
        } else if (arch != "hybrid") {
          throw UsageError("--arch must be hybrid or output-only");
        }
        hc.seed = seed;
        hc.learn_sgp4 = learn_sgp4;
        if (!hidden.empty()) {
          std::vector<int> h;
          for (double v : parse_doubles(hidden, "--hidden")) {
            if (v < 1 || v != std::floor(v)) throw UsageError("--hidden widths must be positive integers");
            h.push_back(static_cast<int>(v));
          }
          if (hc.use_input_net) hc.input_hidden = h;
          hc.output_hidden = h;
        }
        init = HybridModel::create(hc, fit_normalization(set));
      }
      TrainConfig tc;
      tc.epochs = epochs;
      tc.batch_size = batch_size;
      tc.lr_input = tc.lr_sgp4 = tc.lr_output = lr;
      if (optimizer == "sgd") {
        tc.optimizer = Optimizer::Sgd;
      } else if (optimizer != "adam") {
        throw UsageError("--optimizer must be adam or sgd");
      }
      tc.seed = seed;
      tc.workers = workers;
      try {
        const TrainResult r = train(init, set, tc);
        write_file(model_path, checkpoint_json(r.model) + "\n");
        if (!history_path.empty()) write_file(history_path, history_csv(r.history));
        out << "parameters," << r.model.parameter_count() << "\nbest_epoch," << r.history.best_epoch
            << "\ninitial_train_mse," << fmt17(r.history.initial_train_mse) << "\nskipped," << r.history.skipped << "\n";
        return kOk;
      } catch (const TrainingDiverged& e) {
        if (!history_path.empty()) write_file(history_path, history_csv(e.history()));
        throw;
      }
    }
    if (c_eval->parsed()) {
      const SampleSet set = load_sampleset(data_dir);
      const Split sp = parse_split(split);
      const Metrics base = baseline_metrics(set, sp, GravityConstants::wgs72(), workers);
      std::optional<Metrics> model;
      if (!model_path.empty()) model = evaluate(load_checkpoint(read_file(model_path)), set, sp, workers);
      if (format == "csv") {
        out << "model,state_mse,position_rmse_km,velocity_rmse_kms,count,skipped\n" << metrics_csv("sgp4", base);
        if (model) out << metrics_csv("checkpoint", *model);
      } else {
        json j = {{"split", split}, {"sgp4", metrics_json(base)}};
        if (model) j["checkpoint"] = metrics_json(*model);
        out << j.dump(1) << "\n";
      }
      return kOk;
    }
    if (c_bench->parsed()) {
      std::vector<TleRecord> pool;
      if (tle_path.empty()) {
        pool.push_back(parse_tle("1 40697U 15028A   22159.89292057  .00000111  00000-0  59112-4 0  9998",
                                 "2 40697  98.5685 234.7917 0000491 348.2227 119.9277 14.31085333362518"));
      } else {
        pool = load_tles_nonempty(tle_path);
      }
      const PreparedModels p = prepare(pool, gc);
      if (p.models.empty()) throw Error(ErrorCode::Parse, "no propagatable TLE in the pool");
      const auto sz = parse_sizes(sizes);
      const auto rows = bench(p.models, sz, workers, reps);
      if (format == "csv") {
        out << bench_csv(rows);
      } else {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back({{"size", r.size}, {"median_ms", r.median_ms}, {"per_item_us", r.per_item_us}});
        out << arr.dump(1) << "\n";
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const TleError& e) {
    err << "error: " << e.what();
    if (e.line_number() > 0) err << " (line " << e.line_number() << ")";
    err << "\n";
    return kData;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e.code());
  }
  return kUsage;
}

}  // namespace dsgp4kit::cli
