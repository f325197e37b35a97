#include "massbound/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "massbound/errors.hpp"
#include "massbound/fit.hpp"

namespace massbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kShells = 14;
// weighted derivative below this fraction of its cancelling parts counts as zero
constexpr double kExactCancellation = 1e-6;

// Exponent e in value ~ |y|^e, or infinity when every sample vanishes.
double power_exponent(const std::vector<double>& y, const std::vector<double>& values) {
  std::vector<RadialSample> samples;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (values[i] != 0.0) samples.push_back({y[i], values[i]});
  }
  if (samples.size() < 4) return kInf;
  return -decay_order_fit(samples).exponent;
}

}  // namespace

double conformal_scalar_curvature(double scalar, double factor, double factor_laplacian,
                                  int n) {
  const double e = 4.0 / (n - 2);
  return std::pow(factor, -e) * scalar -
         (4.0 * (n - 1) / (n - 2)) * std::pow(factor, -e - 1.0) * factor_laplacian;
}

double conformal_mean_curvature(double mean_curvature, double factor,
                                double factor_normal_derivative, int n, bool flip_normal) {
  const double same = std::pow(factor, -2.0 / (n - 2)) * mean_curvature +
                      (2.0 * (n - 1) / (n - 2)) * std::pow(factor, -double(n) / (n - 2)) *
                          factor_normal_derivative;
  return flip_normal ? -same : same;
}

KelvinSample kelvin_coefficients(const RadialMetric& g, const BVPSolution& green, double y) {
  const double r = 1.0 / y;
  if (!(r >= g.boundary_radius())) {
    throw DomainError(fmt::format("kelvin_coefficients: |y| = {} lies outside 1/r0", y));
  }
  const int n = g.dimension();
  const double h = n - 2.0;
  const double two_beta = 4.0 / h;
  const Jet da = g.stretch_deviation(r);
  const Jet ds = g.areal_ratio_deviation(r);
  const Jet a2 = (1.0 + da) * (1.0 + da);
  const Jet s2 = (1.0 + ds) * (1.0 + ds);
  const double r4 = std::pow(r, 4);

  // F = u r^{n-2} tends to D; the weighted eigenvalues are F^{4/(n-2)} a^2
  // and F^{4/(n-2)} sigma^2
  const Jet f = green.function(r) * radius_power(r, h);
  const Jet weight = pow(f, two_beta);
  const Jet lr = weight * a2;
  const Jet lt = weight * s2;
  const double gap = weight.value * (da.value - ds.value) * (2.0 + da.value + ds.value);
  const double to_y = -r * r;  // d/d|y| = -r^2 d/dr
  const double derivative =
      std::max({std::abs(to_y * lr.d1), std::abs(to_y * lt.d1), std::abs(gap) * r});
  // the factor and metric contributions cancel exactly for a round-ball fill-in
  const double scale =
      r * r * std::max(std::abs(weight.d1) * std::max(a2.value, s2.value),
                       weight.value * std::max(std::abs(a2.d1), std::abs(s2.d1)));
  return {y, a2.value * r4, s2.value * r4, lr.value, lt.value, derivative, scale};
}

KelvinReport fill_in_regularity_diagnostic(const RadialMetric& g, const BVPSolution& green,
                                           const FillInOptions& options) {
  const int n = g.dimension();
  const double r0 = g.boundary_radius();
  const double y_max = 0.1 / r0;
  const double y_min = std::ldexp(y_max, -kShells);

  KelvinReport report;
  const double tau = g.decay_order();
  const double q = g.scalar_decay_order();
  const double gamma = std::min({q - 2.0, n + tau - 2.0, n - 1.0});
  report.claimed_deviation_exponent = tau - 4.0;
  report.claimed_derivative_exponent = gamma - n + 1.0;
  report.weighted_limit = std::pow(green.expansion_constant, 4.0 / (n - 2));

  const int count = 24;
  double cancellation = 0.0;
  for (int i = 0; i < count; ++i) {
    const double y = y_min * std::pow(y_max / y_min, double(i) / (count - 1));
    const KelvinSample s = kelvin_coefficients(g, green, y);
    const double y4 = std::pow(y, -4);
    const double da = g.stretch_deviation(1.0 / y).value;
    const double ds = g.areal_ratio_deviation(1.0 / y).value;
    report.radii.push_back(y);
    report.coefficient_deviation.push_back(
        y4 * std::max(std::abs(da * (2.0 + da)), std::abs(ds * (2.0 + ds))));
    report.weighted_derivative.push_back(s.weighted_derivative);
    // a floor in the natural units lambda / |y| covers metrics with nothing
    // to cancel
    const double floor = 1e-8 * std::max(s.weighted_radial, s.weighted_tangential) / y;
    cancellation = std::max(cancellation,
                            std::max(0.0, s.weighted_derivative - floor) / (s.derivative_scale + 1e-300));
  }

  report.deviation_exponent = power_exponent(report.radii, report.coefficient_deviation);
  report.derivative_exact = cancellation <= kExactCancellation;
  report.derivative_exponent =
      report.derivative_exact ? kInf : power_exponent(report.radii, report.weighted_derivative);

  const KelvinSample inner = kelvin_coefficients(g, green, y_min);
  report.continuity_gap =
      std::max(std::abs(inner.weighted_radial - report.weighted_limit),
               std::abs(inner.weighted_tangential - report.weighted_limit)) /
      report.weighted_limit;

  // Sobolev exponent: shells [y_max 2^{-k-1}, y_max 2^{-k}], 8-point Gauss
  // per shell, samples cached so the bisection on p costs nothing extra.
  if (report.derivative_exact) {
    report.sobolev_exponent_estimate = options.sobolev_cap;
    return report;
  }
  using Rule = boost::math::quadrature::gauss<double, 8>;
  std::vector<std::vector<std::pair<double, double>>> shells(kShells);  // (weight*y^{n-1}, |dh|)
  for (int k = 0; k < kShells; ++k) {
    const double hi = std::ldexp(y_max, -k);
    const double lo = 0.5 * hi;
    const double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        if (abscissa[i] == 0.0 && sign > 0.0) continue;
        const double y = mid + sign * half * abscissa[i];
        const double dh = kelvin_coefficients(g, green, y).weighted_derivative;
        shells[k].push_back({weights[i] * half * std::pow(y, n - 1), dh});
      }
    }
  }
  auto converges = [&](double p) {
    std::vector<double> log_integral;
    for (const auto& shell : shells) {
      double s = 0.0;
      for (const auto& [w, dh] : shell) s += w * std::pow(dh, p);
      if (!(s > 0.0)) return true;
      log_integral.push_back(std::log(s));
    }
    // mean decay rate over the inner half of the shells
    const int half_count = kShells / 2;
    const double slope =
        (log_integral[kShells - 1] - log_integral[half_count]) / (kShells - 1 - half_count);
    return slope < 0.0;
  };
  double lo = 1.0, hi = options.sobolev_cap;
  if (converges(hi)) {
    report.sobolev_exponent_estimate = hi;
  } else if (!converges(lo)) {
    report.sobolev_exponent_estimate = 0.0;
  } else {
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (converges(mid) ? lo : hi) = mid;
    }
    report.sobolev_exponent_estimate = lo;
  }
  return report;
}

FillIn build_fill_in(const RadialMetric& g, const BVPSolution& green,
                     const FillInOptions& options) {
  if (green.kind != "conformal-green") {
    throw DomainError("build_fill_in: the factor must be the conformal Green's function");
  }
  if (!(green.residual_norm <= options.residual_tolerance)) {
    throw SolverError(fmt::format(
        "build_fill_in: conformal Green's function residual {} exceeds tolerance {}",
        green.residual_norm, options.residual_tolerance));
  }
  const int n = g.dimension();
  const double r0 = g.boundary_radius();
  const double h = n - 2.0;
  const double beta = 2.0 / h;

  const double H = mean_curvature_sphere(g, r0);
  const double interior =
      conformal_mean_curvature(H, 1.0, green.normal_derivative_at_boundary, n, true);

  double residual = 0.0;
  for (int i = 0; i < options.samples; ++i) {
    const double t = std::pow(options.t_min, double(i) / (options.samples - 1));
    const double r = r0 * std::pow(t, -1.0 / h);
    const Jet u = green.function(r);
    const double curvature =
        conformal_scalar_curvature(scalar_curvature(g, r), u.value, laplacian(g, u, r), n);
    const double areal = std::pow(u.value, beta) * g.areal_radius(r).value;
    residual = std::max(residual, std::abs(curvature) * areal * areal);
  }

  FillIn fill{g, green, {H, interior}, residual, {}};
  fill.compactified_point_report = fill_in_regularity_diagnostic(g, green, options);
  return fill;
}

CornerVerdict corner_condition(const FillIn& fill, double tolerance) {
  const double margin = fill.corner.interior - fill.corner.exterior;
  return {margin >= -tolerance, margin};
}

double glued_normal_jump(const FillIn& fill) {
  const RadialMetric& g = fill.exterior;
  const double r0 = g.boundary_radius();
  const Jet u = fill.green.function(r0);
  const Jet inverse = reciprocal(u);
  // the fill-in's unit normal at the boundary is -u^{-2/(n-2)} nu
  const double scale = std::pow(u.value, -2.0 / (g.dimension() - 2));
  const double inside = -scale * normal_derivative(g, inverse, r0);
  return std::abs(normal_derivative(g, u, r0) - inside);
}

}  // namespace massbound
