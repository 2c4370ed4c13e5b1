#pragma once

// Template definitions of the SGP4 initializer and propagator. Included by
// the translation units that instantiate them for a scalar type.

#include <cmath>
#include <string>

#include "dsgp4kit/sgp4.hpp"

namespace dsgp4kit {

namespace sgp4_detail {

constexpr double kX2o3 = 2.0 / 3.0;
// Divide-by-zero guard for inclinations at 180 deg.
constexpr double kTemp4 = 1.5e-12;
constexpr double kKeplerTolerance = 1.0e-12;
constexpr int kKeplerMaxIterations = 10;

}  // namespace sgp4_detail

using namespace sgp4_detail;

template <typename T>
BasicModel<T> initialize(const BasicElements<T>& el, const GravityConstants& gc, const DragTuning<T>* tuning) {
  using std::cos;
  using std::fabs;
  using std::pow;
  using std::sin;
  using std::sqrt;

  if (!(value_of(el.ecco) >= 0.0) || !(value_of(el.ecco) < 1.0)) {
    throw Error(ErrorCode::EccentricityOutOfRange, "eccentricity must lie in [0, 1)");
  }
  if (!(value_of(el.no_kozai) > 0.0)) {
    throw Error(ErrorCode::MeanMotionNonPositive, "mean motion must be positive");
  }

  BasicModel<T> m;
  m.elements = el;
  if (tuning != nullptr) m.elements.bstar = el.bstar + tuning->bstar_offset;
  m.gc = gc;
  const T& ecco = m.elements.ecco;
  const T& inclo = m.elements.inclo;
  const T& bstar = m.elements.bstar;
  const double re = gc.radius_earth_km;
  const double j2 = gc.j2;
  const double j4 = gc.j4;
  const double j3oj2 = gc.j3oj2;

  const double ss = 78.0 / re + 1.0;
  const double qzms2ttemp = (120.0 - 78.0) / re;
  const double qzms2t = qzms2ttemp * qzms2ttemp * qzms2ttemp * qzms2ttemp;

  // Auxiliary epoch quantities and Kozai -> Brouwer mean motion.
  const T eccsq = ecco * ecco;
  const T omeosq = 1.0 - eccsq;
  const T rteosq = sqrt(omeosq);
  const T cosio = cos(inclo);
  const T cosio2 = cosio * cosio;

  const T ak = pow(gc.xke / m.elements.no_kozai, kX2o3);
  const T d1 = 0.75 * j2 * (3.0 * cosio2 - 1.0) / (rteosq * omeosq);
  T del = d1 / (ak * ak);
  const T adel = ak * (1.0 - del * del - del * (1.0 / 3.0 + 134.0 * del * del / 81.0));
  del = d1 / (adel * adel);
  m.no_unkozai = m.elements.no_kozai / (1.0 + del);

  if (m.period_minutes() >= kDeepSpacePeriodMinutes) {
    throw Error(ErrorCode::DeepSpaceUnsupported,
                "orbital period " + std::to_string(m.period_minutes()) + " min requires the deep-space model");
  }

  const T ao = pow(gc.xke / m.no_unkozai, kX2o3);
  const T sinio = sin(inclo);
  const T po = ao * omeosq;
  const T con42 = 1.0 - 5.0 * cosio2;
  m.con41 = -con42 - cosio2 - cosio2;
  const T posq = po * po;
  const T rp = ao * (1.0 - ecco);

  m.isimp = rp < (220.0 / re + 1.0);
  T sfour = T(ss);
  T qzms24 = T(qzms2t);
  const T perige = (rp - 1.0) * re;

  // Perigees below 156 km alter s and qoms2t.
  if (perige < 156.0) {
    sfour = perige - 78.0;
    if (perige < 98.0) sfour = T(20.0);
    const T qzms24temp = (120.0 - sfour) / re;
    qzms24 = qzms24temp * qzms24temp * qzms24temp * qzms24temp;
    sfour = sfour / re + 1.0;
  }
  const T pinvsq = 1.0 / posq;

  const T tsi = 1.0 / (ao - sfour);
  m.eta = ao * ecco * tsi;
  const T etasq = m.eta * m.eta;
  const T eeta = ecco * m.eta;
  const T psisq = fabs(1.0 - etasq);
  const T coef = qzms24 * pow(tsi, 4.0);
  const T coef1 = coef / pow(psisq, 3.5);
  const T cc2 = coef1 * m.no_unkozai *
                (ao * (1.0 + 1.5 * etasq + eeta * (4.0 + etasq)) +
                 0.375 * j2 * tsi / psisq * m.con41 * (8.0 + 3.0 * etasq * (8.0 + etasq)));
  m.cc1 = bstar * cc2;
  if (tuning != nullptr) m.cc1 = m.cc1 * tuning->c1_scale;
  T cc3 = T(0.0);
  if (ecco > 1.0e-4) cc3 = -2.0 * coef * tsi * j3oj2 * m.no_unkozai * sinio / ecco;
  m.x1mth2 = 1.0 - cosio2;
  m.cc4 = 2.0 * m.no_unkozai * coef1 * ao * omeosq *
          (m.eta * (2.0 + 0.5 * etasq) + ecco * (0.5 + 2.0 * etasq) -
           j2 * tsi / (ao * psisq) *
               (-3.0 * m.con41 * (1.0 - 2.0 * eeta + etasq * (1.5 - 0.5 * eeta)) +
                0.75 * m.x1mth2 * (2.0 * etasq - eeta * (1.0 + etasq)) * cos(2.0 * m.elements.argpo)));
  m.cc5 = 2.0 * coef1 * ao * omeosq * (1.0 + 2.75 * (etasq + eeta) + eeta * etasq);
  const T cosio4 = cosio2 * cosio2;
  const T temp1 = 1.5 * j2 * pinvsq * m.no_unkozai;
  const T temp2 = 0.5 * temp1 * j2 * pinvsq;
  const T temp3 = -0.46875 * j4 * pinvsq * pinvsq * m.no_unkozai;
  m.mdot = m.no_unkozai + 0.5 * temp1 * rteosq * m.con41 +
           0.0625 * temp2 * rteosq * (13.0 - 78.0 * cosio2 + 137.0 * cosio4);
  m.argpdot = -0.5 * temp1 * con42 + 0.0625 * temp2 * (7.0 - 114.0 * cosio2 + 395.0 * cosio4) +
              temp3 * (3.0 - 36.0 * cosio2 + 49.0 * cosio4);
  const T xhdot1 = -temp1 * cosio;
  m.nodedot = xhdot1 + (0.5 * temp2 * (4.0 - 19.0 * cosio2) + 2.0 * temp3 * (3.0 - 7.0 * cosio2)) * cosio;
  m.omgcof = bstar * cc3 * cos(m.elements.argpo);
  m.xmcof = T(0.0);
  if (ecco > 1.0e-4) m.xmcof = -kX2o3 * coef * bstar / eeta;
  m.nodecf = 3.5 * omeosq * xhdot1 * m.cc1;
  m.t2cof = 1.5 * m.cc1;
  if (fabs(cosio + 1.0) > 1.5e-12) {
    m.xlcof = -0.25 * j3oj2 * sinio * (3.0 + 5.0 * cosio) / (1.0 + cosio);
  } else {
    m.xlcof = -0.25 * j3oj2 * sinio * (3.0 + 5.0 * cosio) / kTemp4;
  }
  m.aycof = -0.5 * j3oj2 * sinio;
  m.delmo = pow(1.0 + m.eta * cos(m.elements.mo), 3.0);
  m.sinmao = sin(m.elements.mo);
  m.x7thm1 = 7.0 * cosio2 - 1.0;

  if (!m.isimp) {
    const T cc1sq = m.cc1 * m.cc1;
    m.d2 = 4.0 * ao * tsi * cc1sq;
    const T temp = m.d2 * tsi * m.cc1 / 3.0;
    m.d3 = (17.0 * ao + sfour) * temp;
    m.d4 = 0.5 * temp * ao * tsi * (221.0 * ao + 31.0 * sfour) * m.cc1;
    m.t3cof = m.d2 + 2.0 * cc1sq;
    m.t4cof = 0.25 * (3.0 * m.d3 + m.cc1 * (12.0 * m.d2 + 10.0 * cc1sq));
    m.t5cof = 0.2 * (3.0 * m.d4 + 12.0 * m.cc1 * m.d3 + 6.0 * m.d2 * m.d2 + 15.0 * cc1sq * (2.0 * m.d2 + cc1sq));
  }
  return m;
}

template <typename T>
BasicState<T> propagate(const BasicModel<T>& m, double t) {
  using std::atan2;
  using std::cos;
  using std::fabs;
  using std::fmod;
  using std::pow;
  using std::sin;
  using std::sqrt;

  const GravityConstants& gc = m.gc;
  const double xke = gc.xke;
  const double j2 = gc.j2;
  const double vkmpersec = gc.radius_earth_km * xke / 60.0;
  const BasicElements<T>& el = m.elements;

  // Secular gravity and atmospheric drag.
  const T xmdf = el.mo + m.mdot * t;
  const T argpdf = el.argpo + m.argpdot * t;
  const T nodedf = el.nodeo + m.nodedot * t;
  T argpm = argpdf;
  T mm = xmdf;
  const double t2 = t * t;
  T nodem = nodedf + m.nodecf * t2;
  T tempa = 1.0 - m.cc1 * t;
  T tempe = el.bstar * m.cc4 * t;
  T templ = m.t2cof * t2;

  if (!m.isimp) {
    const T delomg = m.omgcof * t;
    const T delm = m.xmcof * (pow(1.0 + m.eta * cos(xmdf), 3.0) - m.delmo);
    const T temp = delomg + delm;
    mm = xmdf + temp;
    argpm = argpdf - temp;
    const double t3 = t2 * t;
    const double t4 = t3 * t;
    tempa = tempa - m.d2 * t2 - m.d3 * t3 - m.d4 * t4;
    tempe = tempe + el.bstar * m.cc5 * (sin(mm) - m.sinmao);
    templ = templ + m.t3cof * t3 + t4 * (m.t4cof + t * m.t5cof);
  }

  T nm = m.no_unkozai;
  T em = el.ecco;
  const T inclm = el.inclo;
  if (nm <= 0.0) throw Error(ErrorCode::MeanMotionNonPositive, "mean motion became non-positive");

  const T am = pow(xke / nm, kX2o3) * tempa * tempa;
  nm = xke / pow(am, 1.5);
  em = em - tempe;
  if (em >= 1.0 || em < -0.001) {
    throw Error(ErrorCode::EccentricityOutOfRange, "propagated eccentricity left [-0.001, 1)");
  }
  if (em < 1.0e-6) em = T(1.0e-6);
  mm = mm + m.no_unkozai * templ;
  T xlm = mm + argpm + nodem;
  nodem = fmod(nodem, kTwoPi);
  argpm = fmod(argpm, kTwoPi);
  xlm = fmod(xlm, kTwoPi);
  mm = fmod(xlm - argpm - nodem, kTwoPi);

  const T sinim = sin(inclm);
  const T cosim = cos(inclm);

  const T ep = em;
  const T xincp = inclm;
  const T argpp = argpm;
  const T nodep = nodem;
  const T mp = mm;
  const T sinip = sinim;
  const T cosip = cosim;

  // Long-period periodics.
  const T axnl = ep * cos(argpp);
  T temp = 1.0 / (am * (1.0 - ep * ep));
  const T aynl = ep * sin(argpp) + temp * m.aycof;
  const T xl = mp + argpp + nodep + temp * m.xlcof * axnl;

  // Kepler's equation, differentiated through the executed iterations.
  const T u = fmod(xl - nodep, kTwoPi);
  T eo1 = u;
  T tem5 = T(9999.9);
  T sineo1{};
  T coseo1{};
  int ktr = 1;
  while (fabs(tem5) >= kKeplerTolerance && ktr <= kKeplerMaxIterations) {
    sineo1 = sin(eo1);
    coseo1 = cos(eo1);
    tem5 = 1.0 - coseo1 * axnl - sineo1 * aynl;
    tem5 = (u - aynl * coseo1 + axnl * sineo1 - eo1) / tem5;
    if (fabs(tem5) >= 0.95) tem5 = T(tem5 > 0.0 ? 0.95 : -0.95);
    eo1 = eo1 + tem5;
    ++ktr;
  }
  if (fabs(tem5) >= kKeplerTolerance) {
    throw Error(ErrorCode::KeplerNonConvergence, "Kepler iteration did not converge");
  }

  // Short-period preliminary quantities.
  const T ecose = axnl * coseo1 + aynl * sineo1;
  const T esine = axnl * sineo1 - aynl * coseo1;
  const T el2 = axnl * axnl + aynl * aynl;
  const T pl = am * (1.0 - el2);
  if (pl < 0.0) throw Error(ErrorCode::NegativeSemiLatus, "semi-latus rectum is negative");

  const T rl = am * (1.0 - ecose);
  const T rdotl = sqrt(am) * esine / rl;
  const T rvdotl = sqrt(pl) / rl;
  const T betal = sqrt(1.0 - el2);
  temp = esine / (1.0 + betal);
  const T sinu = am / rl * (sineo1 - aynl - axnl * temp);
  const T cosu = am / rl * (coseo1 - axnl + aynl * temp);
  T su = atan2(sinu, cosu);
  const T sin2u = (cosu + cosu) * sinu;
  const T cos2u = 1.0 - 2.0 * sinu * sinu;
  temp = 1.0 / pl;
  const T temp1 = 0.5 * j2 * temp;
  const T temp2 = temp1 * temp;

  // Short-period periodics.
  const T mrt = rl * (1.0 - 1.5 * temp2 * betal * m.con41) + 0.5 * temp1 * m.x1mth2 * cos2u;
  su = su - 0.25 * temp2 * m.x7thm1 * sin2u;
  const T xnode = nodep + 1.5 * temp2 * cosip * sin2u;
  const T xinc = xincp + 1.5 * temp2 * cosip * sinip * cos2u;
  const T mvt = rdotl - nm * temp1 * m.x1mth2 * sin2u / xke;
  const T rvdot = rvdotl + nm * temp1 * (m.x1mth2 * cos2u + 1.5 * m.con41) / xke;

  if (mrt < 1.0) throw Error(ErrorCode::Decayed, "satellite has decayed");

  // Orientation vectors.
  const T sinsu = sin(su);
  const T cossu = cos(su);
  const T snod = sin(xnode);
  const T cnod = cos(xnode);
  const T sini = sin(xinc);
  const T cosi = cos(xinc);
  const T xmx = -snod * cosi;
  const T xmy = cnod * cosi;
  const T ux = xmx * sinsu + cnod * cossu;
  const T uy = xmy * sinsu + snod * cossu;
  const T uz = sini * sinsu;
  const T vx = xmx * cossu - cnod * sinsu;
  const T vy = xmy * cossu - snod * sinsu;
  const T vz = sini * cossu;

  BasicState<T> s;
  s.tsince_min = t;
  s.position_km = {(mrt * ux) * gc.radius_earth_km, (mrt * uy) * gc.radius_earth_km, (mrt * uz) * gc.radius_earth_km};
  s.velocity_kms = {(mvt * ux + rvdot * vx) * vkmpersec, (mvt * uy + rvdot * vy) * vkmpersec,
                    (mvt * uz + rvdot * vz) * vkmpersec};
  return s;
}

}  // namespace dsgp4kit
