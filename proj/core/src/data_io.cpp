#include "dsgp4kit/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace dsgp4kit {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "read failed for '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

std::vector<TleRecord> load_tle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_tle_stream(in);
}

void write_tle_file(const std::string& path, const std::vector<TleRecord>& tles) {
  std::string out;
  for (const auto& t : tles) {
    if (!t.name.empty()) out += t.name + "\n";
    out += t.line1 + "\n" + t.line2 + "\n";
  }
  write_file(path, out);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& field, int line, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size() || !std::isfinite(v)) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    parse_fail(line, std::string("bad value '") + field + "' in column " + column);
  }
}

constexpr const char* kEphemerisHeader = "epoch_iso,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms";
constexpr std::array<const char*, 6> kStateColumns = {"x_km", "y_km", "z_km", "vx_kms", "vy_kms", "vz_kms"};

}  // namespace

EphemerisSeries parse_ephemeris_csv(std::istream& in) {
  EphemerisSeries s;
  std::string raw;
  int line = 0;
  bool header = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (text[0] == '#') {
      const std::string kv = trim(std::string_view(text).substr(1));
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(std::string_view(kv).substr(0, eq));
      const std::string val = trim(std::string_view(kv).substr(eq + 1));
      if (key == "norad_id") {
        s.norad_id = static_cast<int>(parse_number(val, line, "norad_id"));
      } else if (key == "name") {
        s.name = val;
      } else if (key == "resolution_s") {
        s.resolution_s = parse_number(val, line, "resolution_s");
        if (s.resolution_s <= 0.0) parse_fail(line, "resolution_s must be positive");
      }
      continue;
    }
    if (!header) {
      if (text != kEphemerisHeader) parse_fail(line, std::string("expected header '") + kEphemerisHeader + "'");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(text);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(trim(cell));
    if (f.size() != 7) parse_fail(line, "expected 7 columns, found " + std::to_string(f.size()));
    EphemerisRow row;
    try {
      row.epoch = parse_iso8601(f[0]);
    } catch (const Error& e) {
      parse_fail(line, e.what());
    }
    for (int k = 0; k < 6; ++k) row.state[k] = parse_number(f[static_cast<std::size_t>(k) + 1], line, kStateColumns[static_cast<std::size_t>(k)]);
    if (!s.rows.empty()) {
      const double dt_s = minutes_between(s.rows.back().epoch, row.epoch) * 60.0;
      if (!(dt_s > 0.0)) parse_fail(line, "epoch does not increase");
      // Millisecond slack for timestamps printed to finite precision.
      if (s.resolution_s > 0.0 && std::fabs(dt_s - s.resolution_s) > 1e-3) {
        parse_fail(line, "spacing differs from declared resolution");
      }
    }
    s.rows.push_back(row);
  }
  if (!header && !s.rows.empty()) parse_fail(line, "missing header");
  return s;
}

EphemerisSeries load_ephemeris_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_ephemeris_csv(in);
}

std::string ephemeris_csv(const EphemerisSeries& s) {
  std::string out;
  out += "# norad_id=" + std::to_string(s.norad_id) + "\n";
  if (!s.name.empty()) out += "# name=" + s.name + "\n";
  char buf[160];
  if (s.resolution_s > 0.0) {
    std::snprintf(buf, sizeof buf, "# resolution_s=%.17g\n", s.resolution_s);
    out += buf;
  }
  out += kEphemerisHeader;
  out += '\n';
  for (const auto& r : s.rows) {
    out += format_iso8601(r.epoch, 6);
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.state[0], r.state[1], r.state[2],
                  r.state[3], r.state[4], r.state[5]);
    out += buf;
  }
  return out;
}

std::vector<Observation> parse_observations_csv(std::istream& in) {
  std::vector<Observation> out;
  std::string raw;
  int line = 0;
  bool header = false;
  bool weighted = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text[0] == '#') continue;
    if (!header) {
      if (text == kEphemerisHeader) {
        weighted = false;
      } else if (text == std::string(kEphemerisHeader) + ",weight") {
        weighted = true;
      } else {
        parse_fail(line, std::string("expected header '") + kEphemerisHeader + "[,weight]'");
      }
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(text);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(trim(cell));
    const std::size_t want = weighted ? 8 : 7;
    if (f.size() != want) parse_fail(line, "expected " + std::to_string(want) + " columns, found " + std::to_string(f.size()));
    Observation o;
    try {
      o.epoch = parse_iso8601(f[0]);
    } catch (const Error& e) {
      parse_fail(line, e.what());
    }
    for (int k = 0; k < 6; ++k) o.state[k] = parse_number(f[static_cast<std::size_t>(k) + 1], line, kStateColumns[static_cast<std::size_t>(k)]);
    if (weighted) {
      const double w = parse_number(f[7], line, "weight");
      if (w < 0.0) parse_fail(line, "weight must be non-negative");
      o.weight = Vector6::Constant(w);
    }
    out.push_back(o);
  }
  return out;
}

std::vector<Observation> load_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_observations_csv(in);
}

std::string observations_csv(const std::vector<Observation>& obs) {
  std::string out = std::string(kEphemerisHeader) + ",weight\n";
  char buf[200];
  for (const auto& o : obs) {
    out += format_iso8601(o.epoch, 6);
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", o.state[0], o.state[1], o.state[2],
                  o.state[3], o.state[4], o.state[5], o.weight[0]);
    out += buf;
  }
  return out;
}

double mean_altitude_km(const TleRecord& tle, const GravityConstants& gc) {
  const double n = tle.mean_motion_revday * kTwoPi / kMinutesPerDay;
  if (!(n > 0.0)) throw Error(ErrorCode::MeanMotionNonPositive, "mean motion must be positive");
  return (std::pow(gc.xke / n, 2.0 / 3.0) - 1.0) * gc.radius_earth_km;
}

SampleSet build_sampleset(const std::vector<TleRecord>& tles, const std::vector<EphemerisSeries>& ephemerides,
                          const SplitOptions& opts) {
  const double fsum = opts.fractions[0] + opts.fractions[1] + opts.fractions[2];
  if (std::any_of(opts.fractions.begin(), opts.fractions.end(), [](double f) { return f < 0.0; }) ||
      std::fabs(fsum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative and sum to 1");
  }
  std::map<int, const EphemerisSeries*> eph;
  for (const auto& e : ephemerides) {
    if (!eph.emplace(e.norad_id, &e).second) {
      throw Error(ErrorCode::InvalidArgument, "two ephemerides for satellite " + std::to_string(e.norad_id));
    }
  }

  // Deterministic order: satellite, TLE epoch, then input order for ties.
  std::vector<std::size_t> order(tles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (tles[a].norad_id != tles[b].norad_id) return tles[a].norad_id < tles[b].norad_id;
    return minutes_between(tles[b].epoch(), tles[a].epoch()) < 0.0;
  });

  SampleSet set;
  set.seed = opts.seed;
  set.fractions = opts.fractions;
  set.altitude_holdout_km = opts.altitude_holdout_km;
  for (std::size_t k : order) {
    const TleRecord& t = tles[k];
    const auto it = eph.find(t.norad_id);
    if (it == eph.end()) continue;
    const JulianDate t0 = t.epoch();
    std::vector<Sample> rows;
    for (const auto& r : it->second->rows) {
      const double dt = minutes_between(t0, r.epoch);
      if (dt < 0.0) continue;  // forward prediction only
      rows.push_back({set.tles.size(), dt, r.state});
    }
    if (rows.empty()) continue;
    set.tles.push_back(t);
    set.elements.push_back(to_elements(t));
    set.rows.insert(set.rows.end(), rows.begin(), rows.end());
  }
  if (set.rows.empty()) throw Error(ErrorCode::NoOverlap, "no TLE pairs with an ephemeris timestamp at or after its epoch");

  // TLE-level split. Whole satellites below the altitude threshold go to
  // test first; the rest are shuffled and fill test, valid, train in turn.
  const std::size_t n = set.tles.size();
  const auto n_train = static_cast<std::size_t>(std::llround(opts.fractions[0] * static_cast<double>(n)));
  const auto n_valid = std::min(n - std::min(n, n_train),
                                static_cast<std::size_t>(std::llround(opts.fractions[1] * static_cast<double>(n))));
  const std::size_t n_test = n - std::min(n, n_train) - n_valid;

  std::map<int, std::pair<double, int>> alt_sum;
  for (const auto& t : set.tles) {
    auto& a = alt_sum[t.norad_id];
    a.first += mean_altitude_km(t);
    a.second += 1;
  }
  set.tle_split.assign(n, Split::Train);
  std::vector<std::size_t> free;
  std::size_t in_test = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = alt_sum[set.tles[k].norad_id];
    if (opts.altitude_holdout_km > 0.0 && a.first / a.second < opts.altitude_holdout_km) {
      set.tle_split[k] = Split::Test;
      ++in_test;
    } else {
      free.push_back(k);
    }
  }
  std::mt19937_64 rng(opts.seed);
  for (std::size_t i = free.size(); i > 1; --i) std::swap(free[i - 1], free[rng() % i]);
  std::size_t pos = 0;
  for (; pos < free.size() && in_test < n_test; ++pos, ++in_test) set.tle_split[free[pos]] = Split::Test;
  for (std::size_t v = 0; pos < free.size() && v < n_valid; ++pos, ++v) set.tle_split[free[pos]] = Split::Valid;
  set.check_split_hygiene();
  return set;
}

std::vector<EphemerisSeries> synth_oracle(const std::vector<TleRecord>& truth, const SynthConfig& cfg) {
  if (!(cfg.resolution_s > 0.0) || !(cfg.horizon_days >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "resolution must be positive and horizon non-negative");
  }
  const auto count = static_cast<std::size_t>(std::floor(cfg.horizon_days * 86400.0 / cfg.resolution_s + 1e-9)) + 1;
  std::vector<EphemerisSeries> out;
  out.reserve(truth.size());
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& t : truth) {
    const Model m = initialize(to_elements(t), cfg.gc);
    const double period = m.period_minutes();
    const double a_kmmin = cfg.drift_km_per_day / kMinutesPerDay;
    auto position = [&](double tsince) -> Eigen::Vector3d {
      const StateTeme s = propagate(m, tsince);
      const Eigen::Vector3d r(s.position_km[0], s.position_km[1], s.position_km[2]);
      const Eigen::Vector3d v(s.velocity_kms[0], s.velocity_kms[1], s.velocity_kms[2]);
      const double along = a_kmmin * tsince + cfg.periodic_km * std::sin(kTwoPi * tsince / period);
      return r + along * v.normalized();
    };
    EphemerisSeries s;
    s.norad_id = t.norad_id;
    s.name = t.name;
    s.resolution_s = cfg.resolution_s;
    s.rows.reserve(count);
    const JulianDate t0 = t.epoch();
    for (std::size_t k = 0; k < count; ++k) {
      const double tsince = cfg.start_offset_days * kMinutesPerDay + static_cast<double>(k) * cfg.resolution_s / 60.0;
      EphemerisRow row;
      row.epoch = add_minutes(t0, tsince);
      // The epoch is what is written out; pairing uses the rounded value too.
      const double ts = minutes_between(t0, row.epoch);
      const double h = 1.0 / 60.0;  // one second
      const Eigen::Vector3d r = position(ts);
      const Eigen::Vector3d v = (position(ts + h) - position(ts - h)) / (2.0 * h * 60.0);
      row.state << r, v;
      if (cfg.noise_position_km > 0.0 || cfg.noise_velocity_kms > 0.0) {
        for (int c = 0; c < 3; ++c) row.state[c] += cfg.noise_position_km * gauss(rng);
        for (int c = 3; c < 6; ++c) row.state[c] += cfg.noise_velocity_kms * gauss(rng);
      }
      s.rows.push_back(row);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TleRecord> synthetic_constellation(int count, std::uint64_t seed, const JulianDate& epoch, double min_alt_km,
                                               double max_alt_km) {
  if (count < 1 || count > 9999) throw Error(ErrorCode::InvalidArgument, "constellation size must be in 1..9999");
  if (!(min_alt_km > 0.0 && max_alt_km > min_alt_km)) throw Error(ErrorCode::InvalidArgument, "bad altitude range");
  const GravityConstants gc = GravityConstants::wgs72();
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  // One altitude per stratum, assigned to satellites in shuffled order.
  std::vector<double> alts(static_cast<std::size_t>(count));
  const double width = (max_alt_km - min_alt_km) / count;
  for (int k = 0; k < count; ++k) alts[static_cast<std::size_t>(k)] = min_alt_km + (k + uniform()) * width;
  for (std::size_t i = alts.size(); i > 1; --i) std::swap(alts[i - 1], alts[rng() % i]);

  const auto [year, day] = year_day_from_julian(epoch);
  std::vector<TleRecord> out;
  for (int k = 0; k < count; ++k) {
    TleRecord r;
    r.norad_id = 90000 + k + 1;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", r.norad_id);
    r.norad_field = buf;
    std::snprintf(buf, sizeof buf, "SYNTH-%02d", k + 1);
    r.name = buf;
    std::snprintf(buf, sizeof buf, "%02d%03dA", year % 100, 1 + k % 999);
    r.intl_designator = buf;
    r.epoch_year = year;
    r.epoch_day = day;
    const double a_er = 1.0 + alts[static_cast<std::size_t>(k)] / gc.radius_earth_km;
    r.mean_motion_revday = gc.xke / std::pow(a_er, 1.5) * kMinutesPerDay / kTwoPi;
    r.eccentricity = 1.05e-4 + 2e-4 * uniform();
    r.inclination_deg = 53.0 + 0.1 * (uniform() - 0.5);
    r.raan_deg = 360.0 * uniform();
    r.arg_perigee_deg = 360.0 * uniform();
    r.mean_anomaly_deg = 360.0 * uniform();
    r.bstar = 5e-5 + 1e-4 * uniform();
    r.n_dot = 1e-5 * uniform();
    r.n_ddot = 0.0;
    r.element_set_no = 999;
    r.rev_number = 1000 + k;
    // Round-trip through the text so the numbers are exactly what a file holds.
    for (double* deg : {&r.raan_deg, &r.arg_perigee_deg, &r.mean_anomaly_deg}) {
      if (*deg >= 359.99995) *deg = 0.0;
    }
    const auto [l1, l2] = format_tle(r);
    TleRecord parsed = parse_tle(l1, l2);
    parsed.name = r.name;
    out.push_back(std::move(parsed));
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void save_sampleset(const SampleSet& set, const std::string& dir, const std::vector<std::string>& sources) {
  set.check_split_hygiene();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());

  std::string tle_text;
  for (std::size_t k = 0; k < set.tles.size(); ++k) {
    tle_text += set.tles[k].name.empty() ? "UNNAMED" : set.tles[k].name;
    tle_text += "\n" + set.tles[k].line1 + "\n" + set.tles[k].line2 + "\n";
  }
  std::string csv = "tle,tsince_min,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms\n";
  char buf[256];
  for (const auto& r : set.rows) {
    const auto& s = r.target;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.tle, r.tsince_min, s[0], s[1],
                  s[2], s[3], s[4], s[5]);
    csv += buf;
  }
  write_file((fs::path(dir) / "tles.tle").string(), tle_text);
  write_file((fs::path(dir) / "samples.csv").string(), csv);

  nlohmann::json j;
  std::array<std::size_t, 3> rows_per{}, tles_per{};
  for (const auto& r : set.rows) ++rows_per[static_cast<std::size_t>(set.split_of(r))];
  std::vector<std::string> split_tags;
  for (Split s : set.tle_split) {
    ++tles_per[static_cast<std::size_t>(s)];
    split_tags.emplace_back(split_name(s));
  }
  j["counts"] = {{"tles", set.tles.size()}, {"rows", set.rows.size()}};
  for (Split s : {Split::Train, Split::Valid, Split::Test}) {
    j["splits"][std::string(split_name(s))] = {{"tles", tles_per[static_cast<std::size_t>(s)]},
                                               {"rows", rows_per[static_cast<std::size_t>(s)]}};
  }
  j["tle_split"] = split_tags;
  j["seed"] = set.seed;
  j["fractions"] = set.fractions;
  j["altitude_holdout_km"] = set.altitude_holdout_km;
  j["files"] = {{"tles.tle", hex64(fnv1a(tle_text))}, {"samples.csv", hex64(fnv1a(csv))}};
  nlohmann::json src = nlohmann::json::object();
  for (const auto& p : sources) src[p] = hex64(fnv1a(read_file(p)));
  j["source_hashes"] = src;
  write_file((fs::path(dir) / "manifest.json").string(), j.dump(1) + "\n");
}

SampleSet load_sampleset(const std::string& dir) {
  const std::string tle_text = read_file((fs::path(dir) / "tles.tle").string());
  const std::string csv = read_file((fs::path(dir) / "samples.csv").string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file((fs::path(dir) / "manifest.json").string()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
  try {
    if (j.at("files").at("tles.tle").get<std::string>() != hex64(fnv1a(tle_text)) ||
        j.at("files").at("samples.csv").get<std::string>() != hex64(fnv1a(csv))) {
      throw Error(ErrorCode::Parse, "cache files do not match the manifest hashes");
    }
    SampleSet set;
    std::istringstream tin(tle_text);
    set.tles = parse_tle_stream(tin);
    for (const auto& t : set.tles) set.elements.push_back(to_elements(t));
    for (const auto& tag : j.at("tle_split")) set.tle_split.push_back(parse_split(tag.get<std::string>()));
    if (set.tle_split.size() != set.tles.size()) throw Error(ErrorCode::Parse, "manifest split table size mismatch");
    set.seed = j.at("seed").get<std::uint64_t>();
    set.fractions = j.at("fractions").get<std::array<double, 3>>();
    set.altitude_holdout_km = j.at("altitude_holdout_km").get<double>();

    std::istringstream cin(csv);
    std::string line;
    std::getline(cin, line);
    int lineno = 1;
    while (std::getline(cin, line)) {
      ++lineno;
      if (line.empty()) continue;
      Sample s;
      unsigned long long tle = 0;
      double v[7];
      if (std::sscanf(line.c_str(), "%llu,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &tle, &v[0], &v[1], &v[2], &v[3], &v[4], &v[5],
                      &v[6]) != 8 ||
          tle >= set.tles.size()) {
        throw Error(ErrorCode::Parse, "samples.csv line " + std::to_string(lineno) + ": malformed row");
      }
      s.tle = static_cast<std::size_t>(tle);
      s.tsince_min = v[0];
      for (int k = 0; k < 6; ++k) s.target[k] = v[k + 1];
      set.rows.push_back(s);
    }
    if (set.rows.size() != j.at("counts").at("rows").get<std::size_t>()) {
      throw Error(ErrorCode::Parse, "row count differs from the manifest");
    }
    set.check_split_hygiene();
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
}

}  // namespace dsgp4kit
