#pragma once

#include <functional>
#include <span>
#include <vector>

namespace massbound {

struct RadialSample {
  double radius;
  double value;
};

/// value ~ coefficient * r^{-exponent}; residual is the RMS misfit in log space.
struct PowerLawFit {
  double exponent;
  double coefficient;
  double residual;
};

/// Least-squares power-law fit in log-log coordinates. Needs at least four
/// nonzero samples of one sign; throws FitError otherwise.
PowerLawFit decay_order_fit(std::span<const RadialSample> samples);

struct Extrapolation {
  double value;
  double error_estimate;
  /// Fitted convergence order sigma in M_k = M + c * r_k^{-sigma}; infinite if
  /// the sequence is already constant.
  double fitted_order;
  int level;
};

/// Limit of a sequence sampled at dyadic radii r_k = r0 * 2^k, by Aitken
/// extrapolation with the convergence order fitted from consecutive
/// differences. The level with the smallest error estimate wins.
Extrapolation extrapolate_dyadic(std::span<const double> sequence);

/// Adaptive tanh-sinh quadrature on [a, b].
struct Quadrature {
  double value;
  double error_estimate;
};
Quadrature integrate(const std::function<double(double)>& f, double a, double b,
                     double relative_tolerance = 1e-9);

}  // namespace massbound
