#include "dsgp4kit/sgp4.hpp"

#include <cmath>

#include "sgp4_impl.hpp"

namespace dsgp4kit {

GravityConstants GravityConstants::wgs72() {
  GravityConstants gc{};
  gc.mu = 398600.8;
  gc.radius_earth_km = 6378.135;
  gc.xke = 60.0 / std::sqrt(gc.radius_earth_km * gc.radius_earth_km * gc.radius_earth_km / gc.mu);
  gc.tumin = 1.0 / gc.xke;
  gc.j2 = 0.001082616;
  gc.j3 = -0.00000253881;
  gc.j4 = -0.00000165597;
  gc.j3oj2 = gc.j3 / gc.j2;
  return gc;
}

GravityConstants GravityConstants::wgs84() {
  GravityConstants gc{};
  gc.mu = 398600.5;
  gc.radius_earth_km = 6378.137;
  gc.xke = 60.0 / std::sqrt(gc.radius_earth_km * gc.radius_earth_km * gc.radius_earth_km / gc.mu);
  gc.tumin = 1.0 / gc.xke;
  gc.j2 = 0.00108262998905;
  gc.j3 = -0.00000253215306;
  gc.j4 = -0.00000161098761;
  gc.j3oj2 = gc.j3 / gc.j2;
  return gc;
}

template BasicModel<double> initialize(const BasicElements<double>&, const GravityConstants&,
                                       const DragTuning<double>*);
template BasicModel<long double> initialize(const BasicElements<long double>&, const GravityConstants&,
                                            const DragTuning<long double>*);
template BasicModel<Jet> initialize(const BasicElements<Jet>&, const GravityConstants&, const DragTuning<Jet>*);
template BasicState<double> propagate(const BasicModel<double>&, double);
template BasicState<long double> propagate(const BasicModel<long double>&, double);
template BasicState<Jet> propagate(const BasicModel<Jet>&, double);

}  // namespace dsgp4kit
