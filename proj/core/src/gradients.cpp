#include "dsgp4kit/gradients.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "quad.hpp"
#include "sgp4_impl.hpp"

namespace dsgp4kit {

namespace {

constexpr std::array<std::string_view, 9> kNames = {"n", "e", "i", "raan", "argp", "ma", "bstar", "ndot", "nddot"};
constexpr std::array<std::string_view, 6> kRowNames = {"x_km", "y_km", "z_km", "vx_kms", "vy_kms", "vz_kms"};

}  // namespace

std::string_view param_name(Param p) { return kNames[static_cast<std::size_t>(p)]; }

Param parse_param(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Param>(i);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + std::string(name) + "'");
}

FreeParamSet::FreeParamSet(std::vector<Param> params) : params_(std::move(params)) {
  if (params_.size() > static_cast<std::size_t>(kMaxPartials)) {
    throw Error(ErrorCode::InvalidArgument, "too many free parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    for (std::size_t j = i + 1; j < params_.size(); ++j) {
      if (params_[i] == params_[j]) {
        throw Error(ErrorCode::InvalidArgument, "duplicate parameter '" + std::string(param_name(params_[i])) + "'");
      }
    }
  }
}

FreeParamSet FreeParamSet::parse(std::string_view list) {
  std::vector<Param> ps;
  while (!list.empty()) {
    const auto comma = list.find(',');
    std::string_view tok = list.substr(0, comma);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (!tok.empty()) ps.push_back(parse_param(tok));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return FreeParamSet(std::move(ps));
}

FreeParamSet FreeParamSet::all() {
  return FreeParamSet({Param::MeanMotion, Param::Eccentricity, Param::Inclination, Param::Raan, Param::ArgPerigee,
                       Param::MeanAnomaly, Param::Bstar, Param::NDot, Param::NDDot});
}

FreeParamSet FreeParamSet::elements6() {
  return FreeParamSet({Param::MeanMotion, Param::Eccentricity, Param::Inclination, Param::Raan, Param::ArgPerigee,
                       Param::MeanAnomaly});
}

FreeParamSet FreeParamSet::fit_default() {
  return FreeParamSet({Param::MeanMotion, Param::Eccentricity, Param::Inclination, Param::Raan, Param::ArgPerigee,
                       Param::MeanAnomaly, Param::Bstar});
}

int FreeParamSet::index_of(Param p) const {
  const auto it = std::find(params_.begin(), params_.end(), p);
  return it == params_.end() ? -1 : static_cast<int>(it - params_.begin());
}

std::string FreeParamSet::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i != 0) s += ',';
    s += param_name(params_[i]);
  }
  return s;
}

template <typename T>
T& element_ref(BasicElements<T>& el, Param p) {
  switch (p) {
    case Param::MeanMotion: return el.no_kozai;
    case Param::Eccentricity: return el.ecco;
    case Param::Inclination: return el.inclo;
    case Param::Raan: return el.nodeo;
    case Param::ArgPerigee: return el.argpo;
    case Param::MeanAnomaly: return el.mo;
    case Param::Bstar: return el.bstar;
    case Param::NDot: return el.ndot;
    case Param::NDDot: return el.nddot;
  }
  throw Error(ErrorCode::InvalidArgument, "bad parameter");
}
template double& element_ref(BasicElements<double>&, Param);
template long double& element_ref(BasicElements<long double>&, Param);
template Jet& element_ref(BasicElements<Jet>&, Param);
template Quad& element_ref(BasicElements<Quad>&, Param);

double element_value(const ElementSet& el, Param p) { return element_ref(const_cast<ElementSet&>(el), p); }

BasicElements<Jet> seed_elements(const ElementSet& el, const FreeParamSet& params, int k_total, int offset) {
  BasicElements<Jet> j;
  j.epoch = el.epoch;
  for (int p = 0; p < 9; ++p) {
    const auto param = static_cast<Param>(p);
    element_ref(j, param) = Jet::lift(element_value(el, param), k_total);
  }
  for (int k = 0; k < params.size(); ++k) {
    element_ref(j, params[k]) = Jet::seed(element_value(el, params[k]), offset + k, k_total);
  }
  return j;
}

Vector6 state_vector(const StateTeme& s) {
  Vector6 v;
  v << s.position_km[0], s.position_km[1], s.position_km[2], s.velocity_kms[0], s.velocity_kms[1], s.velocity_kms[2];
  return v;
}

Vector6 state_value(const BasicState<Jet>& s) {
  Vector6 v;
  for (int r = 0; r < 3; ++r) {
    v[r] = s.position_km[static_cast<std::size_t>(r)].value();
    v[r + 3] = s.velocity_kms[static_cast<std::size_t>(r)].value();
  }
  return v;
}

Jacobian state_partials(const BasicState<Jet>& s, int k) {
  Jacobian j(6, k);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < k; ++c) {
      j(r, c) = s.position_km[static_cast<std::size_t>(r)].partial(c);
      j(r + 3, c) = s.velocity_kms[static_cast<std::size_t>(r)].partial(c);
    }
  }
  return j;
}

Sensitivity sensitivity(const ElementSet& el, const FreeParamSet& params, double tsince, const GravityConstants& gc) {
  Sensitivity out;
  if (params.empty()) {
    out.state = propagate(initialize(el, gc), tsince);
    out.jacobian = Jacobian(6, 0);
    return out;
  }
  const int k = params.size();
  const BasicState<Jet> js = propagate(initialize(seed_elements(el, params, k), gc), tsince);
  const Vector6 v = state_value(js);
  out.state.tsince_min = tsince;
  for (int r = 0; r < 3; ++r) {
    out.state.position_km[static_cast<std::size_t>(r)] = v[r];
    out.state.velocity_kms[static_cast<std::size_t>(r)] = v[r + 3];
  }
  out.jacobian = state_partials(js, k);
  return out;
}

Jacobian jacobian(const ElementSet& el, const FreeParamSet& params, double tsince, const GravityConstants& gc) {
  return sensitivity(el, params, tsince, gc).jacobian;
}

Vector6 directional_derivative(const ElementSet& el, const FreeParamSet& params, std::span<const double> direction,
                               double tsince, const GravityConstants& gc) {
  if (direction.size() != static_cast<std::size_t>(params.size())) {
    throw Error(ErrorCode::ShapeMismatch, "direction length differs from parameter count");
  }
  BasicElements<Jet> j;
  j.epoch = el.epoch;
  for (int p = 0; p < 9; ++p) {
    const auto param = static_cast<Param>(p);
    element_ref(j, param) = Jet::lift(element_value(el, param), 1);
  }
  for (int k = 0; k < params.size(); ++k) {
    element_ref(j, params[k]) = element_ref(j, params[k]) + Jet::seed(0.0, 0, 1) * direction[static_cast<std::size_t>(k)];
  }
  return state_partials(propagate(initialize(j, gc), tsince), 1).col(0);
}

double default_fd_step(Param p) {
  switch (p) {
    case Param::MeanMotion: return 1e-9;
    case Param::Eccentricity: return 1e-7;
    case Param::Bstar: return 1e-6;
    case Param::NDot: return 1e-12;
    case Param::NDDot: return 1e-16;
    default: return 1e-6;
  }
}

std::vector<double> default_fd_steps(const FreeParamSet& params) {
  std::vector<double> s;
  for (Param p : params.params()) s.push_back(default_fd_step(p));
  return s;
}

namespace {

BasicElements<Quad> widen(const ElementSet& el) {
  BasicElements<Quad> w;
  w.epoch = el.epoch;
  for (int p = 0; p < 9; ++p) {
    const auto param = static_cast<Param>(p);
    element_ref(w, param) = element_value(el, param);
  }
  return w;
}

std::array<Quad, 6> eval_wide(const BasicElements<Quad>& el, double tsince, const GravityConstants& gc) {
  const auto s = propagate(initialize(el, gc), tsince);
  return {s.position_km[0], s.position_km[1], s.position_km[2], s.velocity_kms[0], s.velocity_kms[1], s.velocity_kms[2]};
}

}  // namespace

template BasicModel<Quad> initialize(const BasicElements<Quad>&, const GravityConstants&, const DragTuning<Quad>*);
template BasicState<Quad> propagate(const BasicModel<Quad>&, double);

Jacobian fd_jacobian(const ElementSet& el, const FreeParamSet& params, double tsince, std::span<const double> steps,
                     const GravityConstants& gc) {
  if (steps.size() != static_cast<std::size_t>(params.size())) {
    throw Error(ErrorCode::ShapeMismatch, "step count differs from parameter count");
  }
  Jacobian j(6, params.size());
  const BasicElements<Quad> base = widen(el);
  for (int k = 0; k < params.size(); ++k) {
    const double h = steps[static_cast<std::size_t>(k)];
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference steps must be positive");
    BasicElements<Quad> plus = base;
    BasicElements<Quad> minus = base;
    element_ref(plus, params[k]) += h;
    element_ref(minus, params[k]) -= h;
    const auto fp = eval_wide(plus, tsince, gc);
    const auto fm = eval_wide(minus, tsince, gc);
    for (int r = 0; r < 6; ++r) {
      j(r, k) = value_of((fp[static_cast<std::size_t>(r)] - fm[static_cast<std::size_t>(r)]) / (2.0 * h));
    }
  }
  return j;
}

Deviation relative_deviation(const Jacobian& a, const Jacobian& b, double rtol, double atol) {
  const double floor = atol / rtol;
  if (a.cols() != b.cols()) throw Error(ErrorCode::ShapeMismatch, "jacobian shapes differ");
  Deviation d;
  for (int c = 0; c < a.cols(); ++c) {
    for (int r = 0; r < 6; ++r) {
      const double dev = std::fabs(a(r, c) - b(r, c)) / std::max(std::fabs(b(r, c)), floor);
      if (dev > d.max_relative || d.row < 0) {
        d.max_relative = dev;
        d.row = r;
        d.col = c;
      }
    }
  }
  return d;
}

FdReport fd_check(const ElementSet& el, const FreeParamSet& params, double tsince, std::span<const double> steps,
                  const GravityConstants& gc) {
  FdReport rep;
  rep.analytic = jacobian(el, params, tsince, gc);
  rep.numeric = fd_jacobian(el, params, tsince, steps, gc);
  rep.deviation = relative_deviation(rep.analytic, rep.numeric);
  return rep;
}

Matrix6 stm_tle(const ElementSet& el, double tsince, const GravityConstants& gc) {
  return jacobian(el, FreeParamSet::elements6(), tsince, gc);
}

std::string jacobian_csv(const Jacobian& j, const FreeParamSet& params) {
  std::string out = "row";
  for (Param p : params.params()) {
    out += ',';
    out += param_name(p);
  }
  out += '\n';
  char buf[40];
  for (int r = 0; r < 6; ++r) {
    out += kRowNames[static_cast<std::size_t>(r)];
    for (int c = 0; c < j.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", j(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace dsgp4kit
