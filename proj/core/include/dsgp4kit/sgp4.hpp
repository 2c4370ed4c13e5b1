#pragma once

// Near-Earth SGP4. Every real-valued intermediate is the template scalar, so
// the same code runs on double, long double and Jet. Only these three
// instantiations are compiled into the library.

#include <array>

#include "dsgp4kit/error.hpp"
#include "dsgp4kit/jet.hpp"
#include "dsgp4kit/tle.hpp"

namespace dsgp4kit {

struct GravityConstants {
  double mu;               ///< km^3/s^2
  double radius_earth_km;  ///< km
  double xke;              ///< sqrt(mu) in earth radii^1.5 / min
  double tumin;            ///< minutes per time unit, 1/xke
  double j2;
  double j3;
  double j4;
  double j3oj2;

  static GravityConstants wgs72();
  static GravityConstants wgs84();
};

enum class Frame { Teme };

/// Optional learnable adjustments to the drag model: B* offset and a
/// multiplicative scale on C1. The defaults leave the model unchanged.
template <typename T>
struct DragTuning {
  T bstar_offset{0.0};
  T c1_scale{1.0};
};

template <typename T>
struct BasicModel {
  BasicElements<T> elements;
  GravityConstants gc{};
  bool isimp = false;

  T no_unkozai{};
  T aycof{}, con41{}, cc1{}, cc4{}, cc5{}, d2{}, d3{}, d4{};
  T delmo{}, eta{}, argpdot{}, omgcof{}, sinmao{};
  T t2cof{}, t3cof{}, t4cof{}, t5cof{};
  T x1mth2{}, x7thm1{}, mdot{}, nodedot{}, xlcof{}, xmcof{}, nodecf{};

  [[nodiscard]] double period_minutes() const { return kTwoPi / value_of(no_unkozai); }
};
using Model = BasicModel<double>;

template <typename T>
struct BasicState {
  static constexpr Frame frame = Frame::Teme;
  std::array<T, 3> position_km{};
  std::array<T, 3> velocity_kms{};
  double tsince_min = 0.0;
};
using StateTeme = BasicState<double>;

/// Period limit separating SGP4 from the (unsupported) deep-space branch.
inline constexpr double kDeepSpacePeriodMinutes = 225.0;

/// Throws Error with DeepSpaceUnsupported, EccentricityOutOfRange or
/// MeanMotionNonPositive.
template <typename T>
BasicModel<T> initialize(const BasicElements<T>& elements, const GravityConstants& gc = GravityConstants::wgs72(),
                         const DragTuning<T>* tuning = nullptr);

/// State `tsince` minutes after the element epoch. Throws Error with Decayed,
/// NegativeSemiLatus, KeplerNonConvergence, EccentricityOutOfRange or
/// MeanMotionNonPositive.
template <typename T>
BasicState<T> propagate(const BasicModel<T>& model, double tsince);

inline StateTeme propagate(const TleRecord& rec, double tsince,
                           const GravityConstants& gc = GravityConstants::wgs72()) {
  return propagate(initialize(to_elements(rec), gc), tsince);
}

extern template BasicModel<double> initialize(const BasicElements<double>&, const GravityConstants&,
                                              const DragTuning<double>*);
extern template BasicModel<long double> initialize(const BasicElements<long double>&, const GravityConstants&,
                                                   const DragTuning<long double>*);
extern template BasicModel<Jet> initialize(const BasicElements<Jet>&, const GravityConstants&,
                                           const DragTuning<Jet>*);
extern template BasicState<double> propagate(const BasicModel<double>&, double);
extern template BasicState<long double> propagate(const BasicModel<long double>&, double);
extern template BasicState<Jet> propagate(const BasicModel<Jet>&, double);

}  // namespace dsgp4kit
