#include "dsgp4kit/orbit_determination.hpp"

#include <cmath>
#include <exception>
#include <json.hpp>

#include "dsgp4kit/batch.hpp"

namespace dsgp4kit {

namespace {

const Vector6& scale_vector() {
  static const Vector6 s = [] {
    Vector6 v;
    v << 1.0 / kPositionScaleKm, 1.0 / kPositionScaleKm, 1.0 / kPositionScaleKm, 1.0 / kVelocityScaleKms,
        1.0 / kVelocityScaleKms, 1.0 / kVelocityScaleKms;
    return v;
  }();
  return s;
}

double reduce_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

bool elements_valid(const ElementSet& el) {
  return el.ecco >= 0.0 && el.ecco < 1.0 && el.no_kozai > 0.0 && std::isfinite(el.bstar) && el.inclo >= 0.0 &&
         el.inclo <= std::numbers::pi;
}

}  // namespace

Vector6 normalize_state(const Vector6& s) { return s.cwiseProduct(scale_vector()); }

Eigen::VectorXd FitState::free_vector() const {
  Eigen::VectorXd x(free.size());
  for (int k = 0; k < free.size(); ++k) x[k] = element_value(elements, free[k]);
  return x;
}

void FitState::set_free_vector(const Eigen::VectorXd& x) {
  if (x.size() != free.size()) throw Error(ErrorCode::ShapeMismatch, "free vector length differs from parameter count");
  for (int k = 0; k < free.size(); ++k) element_ref(elements, free[k]) = x[k];
}

Residuals residuals(const FitState& fit, const std::vector<Observation>& obs, const GravityConstants& gc) {
  Residuals r;
  const Model m = initialize(fit.elements, gc);
  double sum = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double dt = minutes_between(fit.elements.epoch, obs[i].epoch);
    StateTeme s;
    try {
      s = propagate(m, dt);
    } catch (const Error& e) {
      throw Error(e.code(), "observation " + std::to_string(i) + ": " + e.what());
    }
    const Vector6 b = normalize_state(state_vector(s) - obs[i].state);
    const double n2 = b.cwiseProduct(obs[i].weight).squaredNorm();
    r.b.push_back(b);
    r.norms.push_back(std::sqrt(n2));
    sum += n2;
  }
  r.total_norm = std::sqrt(sum);
  return r;
}

Eigen::VectorXd solve_step(const std::vector<LinearizedObservation>& lin, double lambda) {
  if (lin.empty()) throw Error(ErrorCode::InvalidArgument, "no observations to solve");
  const Eigen::Index k = lin.front().a.cols();
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
  for (const auto& o : lin) {
    if (o.a.rows() != 6 || o.a.cols() != k) throw Error(ErrorCode::ShapeMismatch, "observation Jacobians differ in shape");
    const Eigen::MatrixXd aw = o.w.asDiagonal() * o.a;
    const Vector6 bw = o.w.cwiseProduct(o.b);
    n.noalias() += aw.transpose() * aw;
    g.noalias() += aw.transpose() * bw;
  }
  if (k == 0) return Eigen::VectorXd(0);

  // Column scaling to unit diagonal keeps the Cholesky well conditioned
  // across parameters with very different units.
  Eigen::VectorXd s(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (!(n(c, c) > 0.0)) throw Error(ErrorCode::SingularNormalMatrix, "normal matrix has a zero column");
    s[c] = 1.0 / std::sqrt(n(c, c));
  }
  Eigen::MatrixXd ns = s.asDiagonal() * n * s.asDiagonal();
  ns.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(ns);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
    throw Error(ErrorCode::SingularNormalMatrix, "normal matrix is not positive definite");
  }
  const Eigen::VectorXd y = llt.solve(s.cwiseProduct(g));
  return -s.cwiseProduct(y);
}

std::vector<LinearizedObservation> linearize(const FitState& fit, const std::vector<Observation>& obs,
                                             const GravityConstants& gc, int workers) {
  std::vector<LinearizedObservation> lin(obs.size());
  std::vector<std::exception_ptr> errors(obs.size());
  const Vector6& sv = scale_vector();
  parallel_for(obs.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const double dt = minutes_between(fit.elements.epoch, obs[i].epoch);
        const Sensitivity sens = sensitivity(fit.elements, fit.free, dt, gc);
        lin[i].a = sv.asDiagonal() * sens.jacobian;
        lin[i].b = normalize_state(state_vector(sens.state) - obs[i].state);
        lin[i].w = obs[i].weight;
      } catch (const Error& e) {
        errors[i] = std::make_exception_ptr(Error(e.code(), "observation " + std::to_string(i) + ": " + e.what()));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return lin;
}

Eigen::VectorXd normal_step(const FitState& fit, const std::vector<Observation>& obs, const GravityConstants& gc) {
  return solve_step(linearize(fit, obs, gc));
}

FitResult fit_tle(const std::vector<Observation>& obs, const FitState& initial, const FitConfig& cfg) {
  if (obs.empty()) throw Error(ErrorCode::InvalidArgument, "fit needs at least one observation");
  for (const auto& o : obs) {
    if (!o.state.allFinite() || !o.weight.allFinite() || (o.weight.array() < 0.0).any()) {
      throw Error(ErrorCode::InvalidArgument, "observations need finite states and non-negative weights");
    }
  }
  FitResult res;
  res.state = initial;
  FitReport& rep = res.report;
  double cost = residuals(initial, obs, cfg.gc).total_norm;
  rep.initial_norm = cost;
  double lambda = 0.0;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto lin = linearize(res.state, obs, cfg.gc, cfg.workers);
    const Eigen::VectorXd x = res.state.free_vector();
    FitState cand = res.state;
    Residuals rc;
    Eigen::VectorXd dx;
    bool accepted = false;
    bool tiny_step = false;
    while (true) {
      bool ok = true;
      try {
        dx = solve_step(lin, lambda);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularNormalMatrix) throw;
        if (lambda == 0.0) rep.rank_deficient = true;
        ok = false;
      }
      if (ok) {
        cand = res.state;
        cand.set_free_vector(x + dx);
        ok = elements_valid(cand.elements);
        if (ok) {
          try {
            rc = residuals(cand, obs, cfg.gc);
          } catch (const Error&) {
            ok = false;
          }
        }
        if (ok && rc.total_norm <= cost) {
          accepted = true;
          break;
        }
        if (dx.norm() < cfg.step_tolerance) {
          tiny_step = true;
          break;
        }
      }
      lambda = lambda == 0.0 ? cfg.lambda_min : lambda * 10.0;
      if (lambda > cfg.lambda_max) break;
    }

    if (!accepted) {
      // A sub-tolerance step that fails to decrease the residual only
      // reflects round-off: the current iterate is the optimum.
      FitIteration rec;
      rec.total_norm = cost;
      rec.observation_norms = residuals(res.state, obs, cfg.gc).norms;
      rec.step_norm = tiny_step ? dx.norm() : 0.0;
      rec.lambda = lambda;
      rep.iterations.push_back(std::move(rec));
      rep.converged = tiny_step;
      rep.reason = tiny_step ? "step norm below tolerance" : "no downhill step within damping limit";
      return res;
    }

    cand.elements.nodeo = reduce_angle(cand.elements.nodeo);
    cand.elements.argpo = reduce_angle(cand.elements.argpo);
    cand.elements.mo = reduce_angle(cand.elements.mo);
    const double rel = cost > 0.0 ? (cost - rc.total_norm) / cost : 0.0;
    FitIteration rec;
    rec.total_norm = rc.total_norm;
    rec.observation_norms = rc.norms;
    rec.step_norm = dx.norm();
    rec.lambda = lambda;
    rep.iterations.push_back(std::move(rec));
    res.state = cand;
    cost = rc.total_norm;
    if (lambda > 0.0) {
      lambda /= 10.0;
      if (lambda < cfg.lambda_min) lambda = 0.0;
    }

    if (dx.norm() < cfg.step_tolerance) {
      rep.converged = true;
      rep.reason = "step norm below tolerance";
      return res;
    }
    if (rel < cfg.relative_residual_tolerance) {
      rep.converged = true;
      rep.reason = "relative residual change below tolerance";
      return res;
    }
  }
  rep.converged = false;
  rep.reason = "iteration limit reached";
  return res;
}

std::string fit_report_json(const FitReport& rep, const FitState& best) {
  nlohmann::json j;
  j["converged"] = rep.converged;
  j["reason"] = rep.reason;
  j["rank_deficient"] = rep.rank_deficient;
  j["residual_normalization"] = {{"position_km", kPositionScaleKm}, {"velocity_kms", kVelocityScaleKms}};
  j["initial_norm"] = rep.initial_norm;
  j["final_norm"] = rep.final_norm();
  j["free"] = best.free.to_string();
  nlohmann::json its = nlohmann::json::array();
  for (const auto& it : rep.iterations) {
    its.push_back({{"total_norm", it.total_norm},
                   {"step_norm", it.step_norm},
                   {"lambda", it.lambda},
                   {"observation_norms", it.observation_norms}});
  }
  j["iterations"] = its;
  const TleRecord t = best.to_tle();
  j["tle"] = {t.line1, t.line2};
  return j.dump(2);
}

ElementSet osculating_elements(const Vector6& state, const JulianDate& epoch, double mu) {
  const Eigen::Vector3d r = state.head<3>();
  const Eigen::Vector3d v = state.tail<3>();
  const double rn = r.norm();
  const double energy = 0.5 * v.squaredNorm() - mu / rn;
  if (!(energy < 0.0)) throw Error(ErrorCode::HyperbolicState, "state is not bound (non-negative orbital energy)");
  const double a = -mu / (2.0 * energy);
  const Eigen::Vector3d h = r.cross(v);
  const Eigen::Vector3d evec = v.cross(h) / mu - r / rn;
  const double e = evec.norm();
  const double inc = std::acos(std::clamp(h.z() / h.norm(), -1.0, 1.0));
  const Eigen::Vector3d node(-h.y(), h.x(), 0.0);
  const double nn = node.norm();
  const bool equatorial = nn < 1e-11 * h.norm();
  const bool circular = e < 1e-11;

  double raan = 0.0;
  if (!equatorial) raan = std::atan2(node.y(), node.x());
  const Eigen::Vector3d xhat = equatorial ? Eigen::Vector3d(1.0, 0.0, 0.0) : Eigen::Vector3d(node / nn);
  const Eigen::Vector3d yhat = h.normalized().cross(xhat);
  // Angles measured in the orbit plane from the node (or x axis).
  const double u = std::atan2(r.dot(yhat), r.dot(xhat));
  double argp = 0.0;
  double nu = u;
  if (!circular) {
    argp = std::atan2(evec.dot(yhat), evec.dot(xhat));
    nu = u - argp;
  }
  const double ea = 2.0 * std::atan2(std::sqrt(1.0 - e) * std::sin(nu / 2.0), std::sqrt(1.0 + e) * std::cos(nu / 2.0));
  const double ma = ea - e * std::sin(ea);

  ElementSet el;
  el.epoch = epoch;
  el.no_kozai = std::sqrt(mu / (a * a * a)) * 60.0;
  el.ecco = e;
  el.inclo = inc;
  el.nodeo = reduce_angle(raan);
  el.argpo = reduce_angle(argp);
  el.mo = reduce_angle(ma);
  return el;
}

namespace {

// Nonsingular parameters (n, e cos w, e sin w, i, raan, w + M).
using P6 = Eigen::Matrix<double, 6, 1>;

P6 to_p(const ElementSet& el) {
  P6 p;
  p << el.no_kozai, el.ecco * std::cos(el.argpo), el.ecco * std::sin(el.argpo), el.inclo, el.nodeo, el.argpo + el.mo;
  return p;
}

template <typename T>
void from_p(const std::array<T, 6>& p, BasicElements<T>& el) {
  using std::atan2;
  using std::sqrt;
  el.no_kozai = p[0];
  const T e2 = p[1] * p[1] + p[2] * p[2];
  el.ecco = sqrt(e2);
  el.argpo = e2 > 0.0 ? atan2(p[2], p[1]) : T(0.0);
  el.inclo = p[3];
  el.nodeo = p[4];
  el.mo = p[5] - el.argpo;
}

ElementSet elements_from_p(const P6& p, const ElementSet& base) {
  ElementSet el = base;
  from_p<double>({p[0], p[1], p[2], p[3], p[4], p[5]}, el);
  return el;
}

struct Eval {
  bool ok = false;
  Vector6 dev = Vector6::Zero();  ///< raw state difference
  double norm = 0.0;              ///< normalized
};

Eval evaluate(const ElementSet& el, const Vector6& target, const GravityConstants& gc) {
  Eval ev;
  if (!elements_valid(el)) return ev;
  try {
    ev.dev = state_vector(propagate(initialize(el, gc), 0.0)) - target;
  } catch (const Error&) {
    return ev;
  }
  ev.ok = ev.dev.allFinite();
  ev.norm = normalize_state(ev.dev).norm();
  return ev;
}

bool within(const Vector6& dev, const StateToTleConfig& cfg) {
  return dev.head<3>().cwiseAbs().maxCoeff() <= cfg.position_tolerance_km &&
         dev.tail<3>().cwiseAbs().maxCoeff() <= cfg.velocity_tolerance_kms;
}

}  // namespace

FitState state_to_tle(const Vector6& state, const JulianDate& epoch, const TleRecord& templ,
                      const StateToTleConfig& cfg) {
  if (!state.allFinite()) throw Error(ErrorCode::InvalidArgument, "state has non-finite components");
  ElementSet base = osculating_elements(state, epoch, cfg.gc.mu);
  base.bstar = templ.bstar;
  const ElementSet tmpl_el = to_elements(templ);
  base.ndot = tmpl_el.ndot;
  base.nddot = tmpl_el.nddot;

  P6 p = to_p(base);
  Eval cur = evaluate(base, state, cfg.gc);
  if (!cur.ok) throw Error(ErrorCode::NonConvergence, "osculating start point cannot be propagated");

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (within(cur.dev, cfg)) {
      FitState fs;
      fs.templ = templ;
      fs.elements = elements_from_p(p, base);
      fs.elements.nodeo = reduce_angle(fs.elements.nodeo);
      fs.elements.argpo = reduce_angle(fs.elements.argpo);
      fs.elements.mo = reduce_angle(fs.elements.mo);
      return fs;
    }
    // Jacobian of the epoch state with respect to p, by jets.
    std::array<Jet, 6> pj;
    for (int k = 0; k < 6; ++k) pj[static_cast<std::size_t>(k)] = Jet::seed(p[k], k, 6);
    BasicElements<Jet> ej;
    ej.epoch = epoch;
    ej.bstar = Jet::lift(base.bstar, 6);
    ej.ndot = Jet::lift(base.ndot, 6);
    ej.nddot = Jet::lift(base.nddot, 6);
    from_p<Jet>(pj, ej);
    Matrix6 j;
    try {
      j = state_partials(propagate(initialize(ej, cfg.gc), 0.0), 6);
    } catch (const Error& e) {
      throw Error(ErrorCode::NonConvergence, std::string("state inversion failed: ") + e.what());
    }
    const Matrix6 jn = scale_vector().asDiagonal() * j;
    const Vector6 rn = normalize_state(cur.dev);
    const P6 dp = -Eigen::CompleteOrthogonalDecomposition<Matrix6>(jn).solve(rn);

    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 30; ++ls) {
      const P6 cand = p + alpha * dp;
      const Eval ev = evaluate(elements_from_p(cand, base), state, cfg.gc);
      if (ev.ok && ev.norm < cur.norm) {
        p = cand;
        cur = ev;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  if (within(cur.dev, cfg)) {
    FitState fs;
    fs.templ = templ;
    fs.elements = elements_from_p(p, base);
    fs.elements.nodeo = reduce_angle(fs.elements.nodeo);
    fs.elements.argpo = reduce_angle(fs.elements.argpo);
    fs.elements.mo = reduce_angle(fs.elements.mo);
    return fs;
  }
  throw Error(ErrorCode::NonConvergence, "state to TLE inversion did not reach tolerance (position error " +
                                             std::to_string(cur.dev.head<3>().cwiseAbs().maxCoeff()) + " km)");
}

Vector6 average_state_at(const std::vector<TleRecord>& tles, const JulianDate& target, const GravityConstants& gc) {
  if (tles.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one TLE");
  Vector6 sum = Vector6::Zero();
  for (const auto& t : tles) {
    const ElementSet el = to_elements(t);
    sum += state_vector(propagate(initialize(el, gc), minutes_between(el.epoch, target)));
  }
  return sum / static_cast<double>(tles.size());
}

FitState initial_guess_from_tles(const std::vector<TleRecord>& tles, const JulianDate& target,
                                 const StateToTleConfig& cfg) {
  const Vector6 avg = average_state_at(tles, target, cfg.gc);
  const auto latest = std::max_element(tles.begin(), tles.end(), [](const TleRecord& a, const TleRecord& b) {
    return a.epoch().jd() < b.epoch().jd();
  });
  return state_to_tle(avg, target, *latest, cfg);
}

std::vector<Observation> observations_from_tles(const std::vector<TleRecord>& tles, const GravityConstants& gc) {
  std::vector<Observation> obs;
  obs.reserve(tles.size());
  for (const auto& t : tles) {
    const ElementSet el = to_elements(t);
    Observation o;
    o.epoch = el.epoch;
    o.state = state_vector(propagate(initialize(el, gc), 0.0));
    obs.push_back(o);
  }
  return obs;
}

}  // namespace dsgp4kit
