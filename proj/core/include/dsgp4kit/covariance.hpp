#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "dsgp4kit/gradients.hpp"

namespace dsgp4kit {

enum class Basis { TleElements, CartesianTeme };

std::string_view basis_name(Basis b);
Basis parse_basis(std::string_view name);

/// Element basis axes: n (rad/min), e, i, raan, argp, ma (rad). Cartesian
/// axes: x, y, z (km), vx, vy, vz (km/s).
struct Covariance {
  Eigen::MatrixXd matrix;
  Basis basis = Basis::TleElements;
  std::optional<JulianDate> epoch;
  double tsince_min = 0.0;
};

/// max |M - M^T| / max |M| (0 for the zero matrix).
double symmetry_error(const Eigen::MatrixXd& m);
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m);
/// Smallest eigenvalue >= -tol * trace (tol * max|diag| when the trace is 0).
bool is_numerically_psd(const Eigen::MatrixXd& m, double tol = 1e-10);

/// P_t = J P0 J^T with J = stm_tle(elements, tsince). Throws NonPsdInput or
/// ShapeMismatch (P0 must be 6x6 in the element basis).
Covariance propagate_covariance(const Covariance& p0, const ElementSet& elements, double tsince,
                                const GravityConstants& gc = GravityConstants::wgs72());

/// J P J^T tagged with `target`. Throws ShapeMismatch.
Covariance similarity_transform(const Covariance& p, const Eigen::MatrixXd& j, Basis target);

/// {"basis": ..., "epoch": ISO-8601 or null, "tsince_min": ..., "matrix": [[...], ...]}
std::string covariance_to_json(const Covariance& c);
Covariance covariance_from_json(const std::string& text);

}  // namespace dsgp4kit
