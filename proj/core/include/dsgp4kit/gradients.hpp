#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsgp4kit/sgp4.hpp"

namespace dsgp4kit {

enum class Param { MeanMotion, Eccentricity, Inclination, Raan, ArgPerigee, MeanAnomaly, Bstar, NDot, NDDot };

/// Short names used on the command line and in CSV headers:
/// n, e, i, raan, argp, ma, bstar, ndot, nddot.
std::string_view param_name(Param p);
Param parse_param(std::string_view name);

/// Ordered set of differentiable element parameters. The order defines the
/// Jacobian column order.
class FreeParamSet {
 public:
  FreeParamSet() = default;
  explicit FreeParamSet(std::vector<Param> params);

  /// Comma-separated names, e.g. "n,e,i,raan,argp,ma,bstar".
  static FreeParamSet parse(std::string_view list);
  static FreeParamSet all();        ///< all nine
  static FreeParamSet elements6();  ///< n, e, i, raan, argp, ma
  static FreeParamSet fit_default();  ///< elements6 + bstar

  [[nodiscard]] int size() const { return static_cast<int>(params_.size()); }
  [[nodiscard]] bool empty() const { return params_.empty(); }
  [[nodiscard]] Param operator[](int k) const { return params_[static_cast<std::size_t>(k)]; }
  [[nodiscard]] const std::vector<Param>& params() const { return params_; }
  /// Column of p, or -1.
  [[nodiscard]] int index_of(Param p) const;
  [[nodiscard]] std::string to_string() const;

 private:
  std::vector<Param> params_;
};

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

template <typename T>
T& element_ref(BasicElements<T>& el, Param p);
double element_value(const ElementSet& el, Param p);

/// Elements as jets: parameter k of `params` is seeded in slot offset + k of
/// a jet of size k_total; the rest are constants.
BasicElements<Jet> seed_elements(const ElementSet& el, const FreeParamSet& params, int k_total, int offset = 0);

Vector6 state_vector(const StateTeme& s);
Vector6 state_value(const BasicState<Jet>& s);
Jacobian state_partials(const BasicState<Jet>& s, int k);

struct Sensitivity {
  StateTeme state;
  Jacobian jacobian;
};

/// Forward-mode Jacobian of the state at `tsince` with respect to `params`,
/// differentiating through initialization as well as propagation.
Sensitivity sensitivity(const ElementSet& el, const FreeParamSet& params, double tsince,
                        const GravityConstants& gc = GravityConstants::wgs72());
Jacobian jacobian(const ElementSet& el, const FreeParamSet& params, double tsince,
                  const GravityConstants& gc = GravityConstants::wgs72());

/// d state / d s along a single direction (one jet slot).
Vector6 directional_derivative(const ElementSet& el, const FreeParamSet& params, std::span<const double> direction,
                               double tsince, const GravityConstants& gc = GravityConstants::wgs72());

/// Default central-difference steps: e 1e-7, angles 1e-6 rad, n 1e-9 rad/min,
/// B* 1e-6, ndot 1e-12 rad/min^2, nddot 1e-16 rad/min^3.
double default_fd_step(Param p);
std::vector<double> default_fd_steps(const FreeParamSet& params);

/// Central differences evaluated in quad precision.
Jacobian fd_jacobian(const ElementSet& el, const FreeParamSet& params, double tsince, std::span<const double> steps,
                     const GravityConstants& gc = GravityConstants::wgs72());

/// Elementwise |a - b| / max(|b|, atol / rtol), maximum over entries. The
/// result is below rtol exactly when every entry satisfies
/// |a - b| <= max(rtol * |b|, atol).
struct Deviation {
  double max_relative = 0.0;
  int row = -1;
  int col = -1;
};
Deviation relative_deviation(const Jacobian& analytic, const Jacobian& reference, double rtol = 1e-5,
                             double atol = 1e-9);

struct FdReport {
  Jacobian analytic;
  Jacobian numeric;
  Deviation deviation;
};
FdReport fd_check(const ElementSet& el, const FreeParamSet& params, double tsince, std::span<const double> steps,
                  const GravityConstants& gc = GravityConstants::wgs72());

/// d state(t) / d (n, e, i, raan, argp, ma).
Matrix6 stm_tle(const ElementSet& el, double tsince, const GravityConstants& gc = GravityConstants::wgs72());

/// CSV with header "row,<param names>" and rows x_km .. vz_kms.
std::string jacobian_csv(const Jacobian& j, const FreeParamSet& params);

}  // namespace dsgp4kit
