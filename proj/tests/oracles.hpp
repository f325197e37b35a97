#pragma once

// Closed forms and finite-difference references used as test oracles. Nothing
// here calls into the library: every expression is written out from the
// radial formulas directly so a library bug cannot hide in both places.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double harmonic_power(int n, double r) { return std::pow(r, n - 2); }

/// Schwarzschild conformal factor 1 + m/(2 r^{n-2}).
inline double schwarzschild_factor(int n, double m, double r) {
  return 1.0 + m / (2.0 * harmonic_power(n, r));
}

/// Conformal Green's function of Schwarzschild.
inline double schwarzschild_green(int n, double m, double r0, double r) {
  return (2.0 * harmonic_power(n, r0) + m) / (2.0 * harmonic_power(n, r) + m);
}

/// Mean curvature of the boundary sphere of Schwarzschild.
inline double schwarzschild_mean_curvature(int n, double m, double r0) {
  const double e = double(n) / (n - 2);
  return (std::pow(2.0, e) * std::pow(r0, n - 1) - std::pow(2.0, 2.0 / (n - 2)) * m * r0) *
         (n - 1) / std::pow(2.0 * harmonic_power(n, r0) + m, e);
}

/// -(n-1)/(n-2) times the normal derivative of the conformal Green's function.
inline double schwarzschild_green_bound(int n, double m, double r0) {
  const double e = double(n) / (n - 2);
  return std::pow(2.0, e) * std::pow(r0, n - 1) * (n - 1) /
         std::pow(2.0 * harmonic_power(n, r0) + m, e);
}

/// Conformal Green's function for g = U^{4/(n-2)} delta: U u is flat-harmonic.
inline double conformally_flat_green(int n, const std::function<double(double)>& U, double r0,
                                     double r) {
  return U(r0) * harmonic_power(n, r0) / (U(r) * harmonic_power(n, r));
}

/// Antiderivative oracle for the Schwarzschild harmonic Green's function:
/// int_0^t (1 + b s)^{-2} ds = t/(1 + b t) with t = (r0/r)^{n-2}, b = m/(2 r0^{n-2}).
inline double schwarzschild_harmonic(int n, double m, double r0, double r) {
  const double t = std::pow(r0 / r, n - 2);
  const double b = m / (2.0 * harmonic_power(n, r0));
  return (1.0 + b) * t / (1.0 + b * t);
}

struct Derivs {
  double first, second;
};

inline Derivs centered(const std::function<double(double)>& f, double r, double h) {
  const double fm = f(r - h), f0 = f(r), fp = f(r + h);
  return {(fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
}

/// Scalar curvature of U^{4/(n-2)} delta from finite differences of U.
inline double fd_conformal_scalar(int n, const std::function<double(double)>& U, double r,
                                  double h) {
  const auto d = centered(U, r, h);
  const double lap = d.second + (n - 1) * d.first / r;
  return -(4.0 * (n - 1) / (n - 2)) * std::pow(U(r), -double(n + 2) / (n - 2)) * lap;
}

/// Mean curvature of the r-sphere in U^{4/(n-2)} delta as the derivative of
/// log(area) with respect to g-arclength.
inline double fd_area_mean_curvature(int n, const std::function<double(double)>& U, double r,
                                     double h) {
  const double beta = 2.0 / (n - 2);
  auto log_area = [&](double s) { return (n - 1) * std::log(s * std::pow(U(s), beta)); };
  const double dlog = (log_area(r + h) - log_area(r - h)) / (2.0 * h);
  return dlog / std::pow(U(r), beta);
}

/// Observed convergence order from errors at steps h, h/2.
inline double observed_order(double coarse_error, double fine_error) {
  return std::log2(std::abs(coarse_error) / std::abs(fine_error));
}

}  // namespace oracle
