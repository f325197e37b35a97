#pragma once

#include <cmath>

namespace massbound {

/// A scalar function sampled at one radius together with its first and
/// second radial derivatives. Arithmetic on jets propagates derivatives
/// exactly (second-order forward mode), which is how composite profiles
/// such as U^{2/(n-2)} or w^{-4/(n-2)} get their derivatives.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  static constexpr Jet constant(double c) { return {c, 0.0, 0.0}; }
  static constexpr Jet variable(double x) { return {x, 1.0, 0.0}; }
};

/// Chain rule: outer function with value f, f', f'' evaluated at x.value.
constexpr Jet compose(double f, double fp, double fpp, const Jet& x) {
  return {f, fp * x.d1, fpp * x.d1 * x.d1 + fp * x.d2};
}

constexpr Jet operator-(const Jet& a) { return {-a.value, -a.d1, -a.d2}; }

constexpr Jet operator+(const Jet& a, const Jet& b) {
  return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2};
}
constexpr Jet operator-(const Jet& a, const Jet& b) {
  return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2};
}
constexpr Jet operator*(const Jet& a, const Jet& b) {
  return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
          a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
}

constexpr Jet operator+(const Jet& a, double c) { return {a.value + c, a.d1, a.d2}; }
constexpr Jet operator+(double c, const Jet& a) { return a + c; }
constexpr Jet operator-(const Jet& a, double c) { return {a.value - c, a.d1, a.d2}; }
constexpr Jet operator-(double c, const Jet& a) { return {c - a.value, -a.d1, -a.d2}; }
constexpr Jet operator*(const Jet& a, double c) { return {a.value * c, a.d1 * c, a.d2 * c}; }
constexpr Jet operator*(double c, const Jet& a) { return a * c; }
constexpr Jet operator/(const Jet& a, double c) { return {a.value / c, a.d1 / c, a.d2 / c}; }

inline Jet reciprocal(const Jet& a) {
  const double inv = 1.0 / a.value;
  return compose(inv, -inv * inv, 2.0 * inv * inv * inv, a);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(double c, const Jet& b) { return c * reciprocal(b); }

inline Jet pow(const Jet& a, double p) {
  const double f = std::pow(a.value, p);
  const double fp = p * std::pow(a.value, p - 1.0);
  const double fpp = p * (p - 1.0) * std::pow(a.value, p - 2.0);
  return compose(f, fp, fpp, a);
}

inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.value);
  return compose(s, 0.5 / s, -0.25 / (s * a.value), a);
}

inline Jet log(const Jet& a) {
  const double inv = 1.0 / a.value;
  return compose(std::log(a.value), inv, -inv * inv, a);
}

inline Jet exp(const Jet& a) {
  const double e = std::exp(a.value);
  return compose(e, e, e, a);
}

/// log(1 + a), accurate when a.value is tiny.
inline Jet log1p(const Jet& a) {
  const double inv = 1.0 / (1.0 + a.value);
  return compose(std::log1p(a.value), inv, -inv * inv, a);
}

/// exp(a) - 1, accurate when a.value is tiny.
inline Jet expm1(const Jet& a) {
  const double e = std::exp(a.value);
  return compose(std::expm1(a.value), e, e, a);
}

/// (1 + a)^p - 1 without cancellation for small a.
inline Jet pow1p_minus_one(const Jet& a, double p) { return expm1(p * log1p(a)); }

/// r^p for the radius itself.
inline Jet radius_power(double r, double p) {
  const double f = std::pow(r, p);
  return {f, p * f / r, p * (p - 1.0) * f / (r * r)};
}

}  // namespace massbound
