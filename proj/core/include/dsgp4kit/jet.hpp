#pragma once

// Forward-mode automatic differentiation carrier.
//
// A Jet holds a value and up to kMaxPartials partial derivatives. The number
// of live partials K is chosen at runtime per computation. A jet with K = 0
// is a broadcast constant: it combines with a jet of any K. Two jets with
// different nonzero K cannot be combined.
//
// Comparisons look at the value only, so generic code branches the same way
// for double and Jet.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

#include "dsgp4kit/error.hpp"

namespace dsgp4kit {

inline constexpr int kMaxPartials = 16;

class Jet {
 public:
  constexpr Jet() noexcept = default;
  constexpr Jet(double value) noexcept : value_(value) {}  // NOLINT: implicit lift to constant

  /// Constant with K zero partials.
  static Jet lift(double c, int k);
  /// Independent variable: partial `slot` is 1, the rest 0.
  static Jet seed(double c, int slot, int k);

  [[nodiscard]] constexpr double value() const noexcept { return value_; }
  [[nodiscard]] constexpr int size() const noexcept { return k_; }
  [[nodiscard]] double partial(int i) const noexcept { return i < k_ ? d_[static_cast<std::size_t>(i)] : 0.0; }
  [[nodiscard]] std::span<const double> partials() const noexcept {
    return {d_.data(), static_cast<std::size_t>(k_)};
  }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);

  friend Jet operator-(const Jet& a);
  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(const Jet& a, double b);
  friend Jet operator+(double a, const Jet& b);
  friend Jet operator-(const Jet& a, double b);
  friend Jet operator-(double a, const Jet& b);
  friend Jet operator*(const Jet& a, double b);
  friend Jet operator*(double a, const Jet& b);
  friend Jet operator/(const Jet& a, double b);
  friend Jet operator/(double a, const Jet& b);

  friend Jet sqrt(const Jet& a);
  friend Jet pow(const Jet& a, double p);
  friend Jet sin(const Jet& a);
  friend Jet cos(const Jet& a);
  friend Jet atan2(const Jet& y, const Jet& x);
  friend Jet fmod(const Jet& a, double m);
  friend Jet floor(const Jet& a);
  friend Jet abs(const Jet& a);
  friend Jet fabs(const Jet& a);
  friend Jet exp(const Jet& a);
  friend Jet log(const Jet& a);
  friend Jet tanh(const Jet& a);

  friend constexpr bool operator<(const Jet& a, const Jet& b) noexcept { return a.value_ < b.value_; }
  friend constexpr bool operator>(const Jet& a, const Jet& b) noexcept { return a.value_ > b.value_; }
  friend constexpr bool operator<=(const Jet& a, const Jet& b) noexcept { return a.value_ <= b.value_; }
  friend constexpr bool operator>=(const Jet& a, const Jet& b) noexcept { return a.value_ >= b.value_; }
  friend constexpr bool operator==(const Jet& a, const Jet& b) noexcept { return a.value_ == b.value_; }

 private:
  // Result size for a binary op, throwing on incompatible sizes.
  static int joint_size(const Jet& a, const Jet& b);
  // value with partials d * scale
  Jet scaled(double value, double scale) const;

  double value_ = 0.0;
  std::array<double, kMaxPartials> d_{};
  std::int32_t k_ = 0;
};

// Scalar-generic helpers so templated numeric code reads the same for both types.
constexpr double value_of(double x) noexcept { return x; }
constexpr double value_of(long double x) noexcept { return static_cast<double>(x); }
constexpr double value_of(const Jet& x) noexcept { return x.value(); }

// ---------------------------------------------------------------------------
// Implementation

inline int Jet::joint_size(const Jet& a, const Jet& b) {
  if (a.k_ == b.k_ || b.k_ == 0) return a.k_;
  if (a.k_ == 0) return b.k_;
  throw Error(ErrorCode::JetSizeMismatch, "jet partial counts differ");
}

inline Jet Jet::lift(double c, int k) {
  if (k < 1 || k > kMaxPartials) throw Error(ErrorCode::JetSlotOutOfRange, "jet size out of range");
  Jet j(c);
  j.k_ = k;
  return j;
}

inline Jet Jet::seed(double c, int slot, int k) {
  Jet j = lift(c, k);
  if (slot < 0 || slot >= k) throw Error(ErrorCode::JetSlotOutOfRange, "jet seed slot out of range");
  j.d_[static_cast<std::size_t>(slot)] = 1.0;
  return j;
}

inline Jet Jet::scaled(double value, double scale) const {
  Jet r(value);
  r.k_ = k_;
  for (int i = 0; i < k_; ++i) r.d_[i] = d_[i] * scale;
  return r;
}

inline Jet operator-(const Jet& a) {
  Jet r(-a.value_);
  r.k_ = a.k_;
  for (int i = 0; i < a.k_; ++i) r.d_[i] = -a.d_[i];
  return r;
}

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r(a.value_ + b.value_);
  r.k_ = Jet::joint_size(a, b);
  for (int i = 0; i < r.k_; ++i) r.d_[i] = a.d_[i] + b.d_[i];
  return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r(a.value_ - b.value_);
  r.k_ = Jet::joint_size(a, b);
  for (int i = 0; i < r.k_; ++i) r.d_[i] = a.d_[i] - b.d_[i];
  return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.value_ * b.value_);
  r.k_ = Jet::joint_size(a, b);
  for (int i = 0; i < r.k_; ++i) r.d_[i] = a.d_[i] * b.value_ + a.value_ * b.d_[i];
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  if (b.value_ == 0.0) throw Error(ErrorCode::JetDomain, "jet division by zero");
  Jet r(a.value_ / b.value_);
  r.k_ = Jet::joint_size(a, b);
  for (int i = 0; i < r.k_; ++i) r.d_[i] = (a.d_[i] - r.value_ * b.d_[i]) / b.value_;
  return r;
}

inline Jet operator+(const Jet& a, double b) {
  Jet r = a;
  r.value_ = a.value_ + b;
  return r;
}
inline Jet operator+(double a, const Jet& b) {
  Jet r = b;
  r.value_ = a + b.value_;
  return r;
}
inline Jet operator-(const Jet& a, double b) {
  Jet r = a;
  r.value_ = a.value_ - b;
  return r;
}
inline Jet operator-(double a, const Jet& b) { return b.scaled(a - b.value_, -1.0); }
inline Jet operator*(const Jet& a, double b) { return a.scaled(a.value_ * b, b); }
inline Jet operator*(double a, const Jet& b) { return b.scaled(a * b.value_, a); }
inline Jet operator/(const Jet& a, double b) {
  if (b == 0.0) throw Error(ErrorCode::JetDomain, "jet division by zero");
  Jet r(a.value_ / b);
  r.k_ = a.k_;
  for (int i = 0; i < a.k_; ++i) r.d_[i] = a.d_[i] / b;
  return r;
}
inline Jet operator/(double a, const Jet& b) {
  if (b.value_ == 0.0) throw Error(ErrorCode::JetDomain, "jet division by zero");
  const double v = a / b.value_;
  return b.scaled(v, -v / b.value_);
}

inline Jet& Jet::operator+=(const Jet& o) { return *this = *this + o; }
inline Jet& Jet::operator-=(const Jet& o) { return *this = *this - o; }
inline Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }
inline Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

inline Jet sqrt(const Jet& a) {
  if (a.value_ < 0.0) throw Error(ErrorCode::JetDomain, "jet sqrt of negative value");
  const double v = std::sqrt(a.value_);
  return a.scaled(v, 0.5 / v);
}

inline Jet pow(const Jet& a, double p) {
  if (a.value_ < 0.0 && p != std::floor(p)) {
    throw Error(ErrorCode::JetDomain, "jet pow of negative base with non-integer exponent");
  }
  const double v = std::pow(a.value_, p);
  return a.scaled(v, p == 0.0 ? 0.0 : p * std::pow(a.value_, p - 1.0));
}

inline Jet sin(const Jet& a) { return a.scaled(std::sin(a.value_), std::cos(a.value_)); }
inline Jet cos(const Jet& a) { return a.scaled(std::cos(a.value_), -std::sin(a.value_)); }

inline Jet atan2(const Jet& y, const Jet& x) {
  Jet r(std::atan2(y.value_, x.value_));
  r.k_ = Jet::joint_size(y, x);
  const double den = x.value_ * x.value_ + y.value_ * y.value_;
  if (den == 0.0) return r;
  for (int i = 0; i < r.k_; ++i) r.d_[i] = (x.value_ * y.d_[i] - y.value_ * x.d_[i]) / den;
  return r;
}

// Angle reduction: slope 1 away from the cut points.
inline Jet fmod(const Jet& a, double m) {
  Jet r = a;
  r.value_ = std::fmod(a.value_, m);
  return r;
}

inline Jet floor(const Jet& a) { return a.scaled(std::floor(a.value_), 0.0); }

// Right-limit derivative at zero.
inline Jet abs(const Jet& a) { return a.scaled(std::fabs(a.value_), a.value_ < 0.0 ? -1.0 : 1.0); }
inline Jet fabs(const Jet& a) { return abs(a); }

inline Jet exp(const Jet& a) {
  const double v = std::exp(a.value_);
  return a.scaled(v, v);
}

inline Jet log(const Jet& a) {
  if (a.value_ <= 0.0) throw Error(ErrorCode::JetDomain, "jet log of non-positive value");
  return a.scaled(std::log(a.value_), 1.0 / a.value_);
}

inline Jet tanh(const Jet& a) {
  const double v = std::tanh(a.value_);
  return a.scaled(v, 1.0 - v * v);
}

}  // namespace dsgp4kit
