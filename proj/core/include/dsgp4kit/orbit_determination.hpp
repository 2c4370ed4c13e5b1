#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dsgp4kit/gradients.hpp"

namespace dsgp4kit {

/// Residual scaling: positions in earth radii, velocities in units of
/// 7.905 km/s.
inline constexpr double kPositionScaleKm = 6378.135;
inline constexpr double kVelocityScaleKms = 7.905;

Vector6 normalize_state(const Vector6& s);

struct Observation {
  JulianDate epoch;
  Vector6 state = Vector6::Zero();   ///< km, km/s, TEME
  Vector6 weight = Vector6::Ones();  ///< per component, >= 0
};

/// Candidate TLE at the target epoch: elements.epoch is t_T. Fields outside
/// `free` stay as in the elements; identifiers come from `templ`.
struct FitState {
  TleRecord templ;
  ElementSet elements;
  FreeParamSet free = FreeParamSet::fit_default();

  [[nodiscard]] Eigen::VectorXd free_vector() const;
  void set_free_vector(const Eigen::VectorXd& x);
  [[nodiscard]] TleRecord to_tle() const { return with_elements(templ, elements); }
};

struct Residuals {
  std::vector<Vector6> b;  ///< normalized, unweighted
  std::vector<double> norms;  ///< per observation, weighted
  double total_norm = 0.0;    ///< sqrt(sum of squared weighted components)
};

/// b_i = N (propagate(fit, t_i - t_T) - x_i). Propagation errors are
/// rethrown with the observation index in the message.
Residuals residuals(const FitState& fit, const std::vector<Observation>& obs,
                    const GravityConstants& gc = GravityConstants::wgs72());

/// One observation's linear model: residual b + A dx, weighted by w.
struct LinearizedObservation {
  Eigen::MatrixXd a;  ///< 6 x K
  Vector6 b = Vector6::Zero();
  Vector6 w = Vector6::Ones();
};

/// dx = -(A^T W A + lambda diag(A^T W A))^-1 A^T W b over the stacked
/// observations, W = diag(w^2). Cholesky on the column-scaled normal matrix;
/// throws SingularNormalMatrix when it is not positive definite.
Eigen::VectorXd solve_step(const std::vector<LinearizedObservation>& lin, double lambda = 0.0);

std::vector<LinearizedObservation> linearize(const FitState& fit, const std::vector<Observation>& obs,
                                             const GravityConstants& gc = GravityConstants::wgs72(), int workers = 1);

/// Undamped Gauss-Newton step at `fit`.
Eigen::VectorXd normal_step(const FitState& fit, const std::vector<Observation>& obs,
                            const GravityConstants& gc = GravityConstants::wgs72());

struct FitConfig {
  int max_iterations = 25;
  double step_tolerance = 1e-10;
  double relative_residual_tolerance = 1e-12;
  /// Levenberg damping starts undamped and escalates x10 from lambda_min.
  double lambda_min = 1e-12;
  double lambda_max = 1e8;
  int workers = 1;
  GravityConstants gc = GravityConstants::wgs72();
};

struct FitIteration {
  double total_norm = 0.0;  ///< after the step
  std::vector<double> observation_norms;
  double step_norm = 0.0;
  double lambda = 0.0;
};

struct FitReport {
  double initial_norm = 0.0;
  std::vector<FitIteration> iterations;
  bool converged = false;
  std::string reason;
  bool rank_deficient = false;

  [[nodiscard]] double final_norm() const { return iterations.empty() ? initial_norm : iterations.back().total_norm; }
};

struct FitResult {
  FitState state;  ///< best iterate
  FitReport report;
};

/// Damped Gauss-Newton. Non-convergence is reported in the report (reason
/// and converged = false) together with the best iterate.
FitResult fit_tle(const std::vector<Observation>& obs, const FitState& initial, const FitConfig& cfg = {});

std::string fit_report_json(const FitReport& rep, const FitState& best);

struct StateToTleConfig {
  int max_iterations = 50;
  double position_tolerance_km = 1e-9;
  double velocity_tolerance_kms = 1e-12;
  GravityConstants gc = GravityConstants::wgs72();
};

/// Two-body osculating elements of a TEME state as SGP4-style elements
/// (Kozai mean motion slot holds the osculating mean motion). Throws
/// HyperbolicState.
ElementSet osculating_elements(const Vector6& state, const JulianDate& epoch, double mu_km3s2 = 398600.8);

/// Mean elements whose SGP4 state at tsince 0 matches `state`. B*, ndot and
/// nddot come from the template. Throws NonConvergence or HyperbolicState.
FitState state_to_tle(const Vector6& state, const JulianDate& epoch, const TleRecord& templ,
                      const StateToTleConfig& cfg = {});

/// Average of each TLE propagated to t_T, inverted by state_to_tle with the
/// latest TLE as template.
FitState initial_guess_from_tles(const std::vector<TleRecord>& tles, const JulianDate& target,
                                 const StateToTleConfig& cfg = {});
Vector6 average_state_at(const std::vector<TleRecord>& tles, const JulianDate& target,
                         const GravityConstants& gc = GravityConstants::wgs72());

/// Each TLE propagated to its own epoch, unit weights.
std::vector<Observation> observations_from_tles(const std::vector<TleRecord>& tles,
                                                const GravityConstants& gc = GravityConstants::wgs72());

}  // namespace dsgp4kit
