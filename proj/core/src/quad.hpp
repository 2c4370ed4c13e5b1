#pragma once

// Thin wrapper over __float128 so generic numeric code can run in quad
// precision; used for the finite-difference reference only.

#include <quadmath.h>

namespace dsgp4kit {

struct Quad {
  __float128 v = 0;

  Quad() = default;
  Quad(double d) : v(d) {}  // NOLINT: implicit like a built-in float
  static Quad raw(__float128 x) {
    Quad q;
    q.v = x;
    return q;
  }

  Quad& operator+=(const Quad& o) { v += o.v; return *this; }
  Quad& operator-=(const Quad& o) { v -= o.v; return *this; }

  friend Quad operator-(const Quad& a) { return raw(-a.v); }
  friend Quad operator+(const Quad& a, const Quad& b) { return raw(a.v + b.v); }
  friend Quad operator-(const Quad& a, const Quad& b) { return raw(a.v - b.v); }
  friend Quad operator*(const Quad& a, const Quad& b) { return raw(a.v * b.v); }
  friend Quad operator/(const Quad& a, const Quad& b) { return raw(a.v / b.v); }
  friend bool operator<(const Quad& a, const Quad& b) { return a.v < b.v; }
  friend bool operator>(const Quad& a, const Quad& b) { return a.v > b.v; }
  friend bool operator<=(const Quad& a, const Quad& b) { return a.v <= b.v; }
  friend bool operator>=(const Quad& a, const Quad& b) { return a.v >= b.v; }
  friend bool operator==(const Quad& a, const Quad& b) { return a.v == b.v; }

  friend Quad sqrt(const Quad& a) { return raw(sqrtq(a.v)); }
  friend Quad pow(const Quad& a, double p) { return raw(powq(a.v, p)); }
  friend Quad sin(const Quad& a) { return raw(sinq(a.v)); }
  friend Quad cos(const Quad& a) { return raw(cosq(a.v)); }
  friend Quad atan2(const Quad& y, const Quad& x) { return raw(atan2q(y.v, x.v)); }
  friend Quad fmod(const Quad& a, double m) { return raw(fmodq(a.v, m)); }
  friend Quad fabs(const Quad& a) { return raw(fabsq(a.v)); }
};

inline double value_of(const Quad& q) { return static_cast<double>(q.v); }

}  // namespace dsgp4kit
