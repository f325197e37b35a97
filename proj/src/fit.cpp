#include "massbound/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "massbound/errors.hpp"

namespace massbound {

PowerLawFit decay_order_fit(std::span<const RadialSample> samples) {
  if (samples.size() < 4) {
    throw FitError("decay_order_fit: need at least 4 samples");
  }
  const bool positive = samples.front().value > 0.0;
  for (const auto& s : samples) {
    if (s.value == 0.0 || !std::isfinite(s.value)) {
      throw FitError("decay_order_fit: zero or non-finite sample");
    }
    if ((s.value > 0.0) != positive) {
      throw FitError("decay_order_fit: sign change across samples");
    }
    if (!(s.radius > 0.0)) {
      throw FitError("decay_order_fit: radii must be positive");
    }
  }

  const double count = static_cast<double>(samples.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    const double x = std::log(s.radius);
    const double y = std::log(std::abs(s.value));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = count * sxx - sx * sx;
  if (denom <= 0.0) {
    throw FitError("decay_order_fit: radii are not distinct");
  }
  const double slope = (count * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / count;

  double ss = 0.0;
  for (const auto& s : samples) {
    const double e = std::log(std::abs(s.value)) - (intercept + slope * std::log(s.radius));
    ss += e * e;
  }
  const double sign = positive ? 1.0 : -1.0;
  return {-slope, sign * std::exp(intercept), std::sqrt(ss / count)};
}

Extrapolation extrapolate_dyadic(std::span<const double> m) {
  const auto levels = static_cast<int>(m.size());
  if (levels < 3) {
    throw ExtrapolationError("extrapolate_dyadic: need at least 3 levels");
  }
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> estimate(levels, nan);
  std::vector<double> order(levels, nan);
  for (int k = 2; k < levels; ++k) {
    const double d1 = m[k - 1] - m[k - 2];
    const double d2 = m[k] - m[k - 1];
    if (std::abs(d2) <= noise) {
      estimate[k] = m[k];
      order[k] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double ratio = d2 / d1;
    if (!(ratio > 0.0 && ratio < 1.0)) continue;
    estimate[k] = m[k] + d2 * ratio / (1.0 - ratio);
    order[k] = -std::log2(ratio);
  }

  Extrapolation best{m.back(), std::numeric_limits<double>::infinity(), nan, levels - 1};
  for (int k = 3; k < levels; ++k) {
    if (std::isnan(estimate[k]) || std::isnan(estimate[k - 1])) continue;
    const double err = std::abs(estimate[k] - estimate[k - 1]);
    if (err <= best.error_estimate) {
      best = {estimate[k], err, order[k], k};
    }
  }
  if (!std::isfinite(best.error_estimate)) {
    // never entered the asymptotic regime; report the raw tail spread
    best.error_estimate = std::abs(m[levels - 1] - m[levels - 2]);
  }
  return best;
}

Quadrature integrate(const std::function<double(double)>& f, double a, double b,
                     double relative_tolerance) {
  // tanh-sinh copes with the algebraic endpoint behaviour x^alpha that
  // compactified tails produce; one integrator per thread keeps it reentrant
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(f, a, b, relative_tolerance, &error, &l1);
  return {value, error};
}

}  // namespace massbound
