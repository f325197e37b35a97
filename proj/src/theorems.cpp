#include "massbound/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "massbound/errors.hpp"

namespace massbound {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// (n-1)/(n-2), the factor turning a normal derivative into a mean-curvature bound.
double bound_factor(const RadialMetric& g) {
  return (g.dimension() - 1.0) / (g.dimension() - 2.0);
}

Verdict start(const MetricAnalysis& a, TheoremId id, double c) {
  Verdict v{};
  v.theorem = id;
  v.boundary_value = c;
  v.mass = a.mass.value;
  v.mass_error = a.mass.error_estimate;
  v.implication_margin = kNaN;
  if (!a.mass.converged) {
    v.warnings.push_back(fmt::format("ADM mass extrapolation did not reach tolerance (error {:.3g})",
                                     a.mass.error_estimate));
  }
  return v;
}

Verdict finish(Verdict v, const Tolerances& tol) {
  v.hypothesis_holds = v.condition_margin >= -tol.hypothesis;
  v.conclusion_holds = v.conclusion_margin >= -tol.conclusion;
  v.equality.hypothesis = std::abs(v.condition_margin) <= tol.equality;
  v.equality.conclusion = std::abs(v.conclusion_margin) <= tol.equality;
  v.soundness_violation = v.hypothesis_holds && !v.conclusion_holds;
  if (v.soundness_violation) {
    v.warnings.push_back(fmt::format(
        "SOUNDNESS VIOLATION: {} hypothesis holds (margin {:.3g}) but mass {:.12g} is below the "
        "bound by {:.3g}; this indicates a solver or extrapolation failure",
        to_string(v.theorem), v.condition_margin, v.mass, -v.conclusion_margin));
  }
  return v;
}

void require_boundary_value(double c, bool allow_one, const Tolerances& tol,
                            std::vector<std::string>& warnings, const char* who) {
  if (!(c > -1.0)) {
    throw DomainError(fmt::format("{}: boundary value c = {} violates the hypothesis c > -1", who, c));
  }
  if (!allow_one && c == 1.0) {
    throw DomainError(fmt::format(
        "{}: c = 1 is excluded by the hypothesis c != 1; use the normalized form instead", who));
  }
  if (c > tol.large_boundary_value) {
    warnings.push_back(fmt::format(
        "boundary value c = {} is large; margins are poorly conditioned in this range", c));
  }
}

}  // namespace

std::string_view to_string(TheoremId id) {
  switch (id) {
    case TheoremId::ConformalGreen: return "conformal-green";
    case TheoremId::HarmonicGreen: return "harmonic-green";
    case TheoremId::MassCapacity: return "mass-capacity";
    case TheoremId::BoundaryLevel: return "boundary-level";
    case TheoremId::NormalizedLevel: return "normalized-level";
  }
  return "unknown";
}

MetricAnalysis analyze(const RadialMetric& g, const TheoremOptions& options) {
  const double r0 = g.boundary_radius();
  double min_scaled = std::numeric_limits<double>::infinity();
  double worst_r = r0;
  for (double r : sample_radii(r0, 200, 1e6)) {
    const double rho = g.areal_radius(r).value;
    const double scaled = scalar_curvature(g, r) * rho * rho;
    if (scaled < min_scaled) {
      min_scaled = scaled;
      worst_r = r;
    }
  }
  if (min_scaled < -1e-10) {
    throw DomainError(fmt::format(
        "analyze: {} has negative scalar curvature (R rho^2 = {:.3g} at r = {:.6g}); the mass "
        "inequalities assume R >= 0",
        g.label(), min_scaled, worst_r));
  }
  return MetricAnalysis{g,
                        mean_curvature_sphere(g, r0),
                        solve_conformal_green(g, options.solver),
                        solve_harmonic_green(g, options.solver),
                        estimate_adm_mass(g, options.mass),
                        min_scaled};
}

Verdict check_theorem_main(const MetricAnalysis& a, const Tolerances& tol) {
  Verdict v = start(a, TheoremId::ConformalGreen, kNaN);
  v.condition_margin =
      -bound_factor(a.metric) * a.conformal_green.normal_derivative_at_boundary - a.mean_curvature;
  v.capacity_constant = 0.0;
  v.conclusion_margin = v.mass;
  v.rigidity_residual = rigidity_residual(a.metric, RigidityModel::FlatExterior);
  return finish(std::move(v), tol);
}

Verdict check_corollary(const MetricAnalysis& a, const Tolerances& tol) {
  Verdict v = start(a, TheoremId::HarmonicGreen, kNaN);
  const double k = bound_factor(a.metric);
  v.condition_margin = -k * a.harmonic_green.normal_derivative_at_boundary - a.mean_curvature;
  v.capacity_constant = 0.0;
  v.conclusion_margin = v.mass;
  v.rigidity_residual = rigidity_residual(a.metric, RigidityModel::FlatExterior);
  v.implication_margin = k * (a.harmonic_green.normal_derivative_at_boundary -
                              a.conformal_green.normal_derivative_at_boundary);
  return finish(std::move(v), tol);
}

Verdict check_mass_capacity(const MetricAnalysis& a, double c, const Tolerances& tol) {
  Verdict v = start(a, c == 0.0 ? TheoremId::MassCapacity : TheoremId::BoundaryLevel, c);
  require_boundary_value(c, false, tol, v.warnings, "check_mass_capacity");
  const BVPSolution phi = harmonic_with_boundary(a.harmonic_green, c);
  // 2c/(1 - c^2) dphi/dnu >= (n-2)/(n-1) H, rescaled to a bound on H
  v.condition_margin = bound_factor(a.metric) * (2.0 * c / (1.0 - c * c)) *
                           phi.normal_derivative_at_boundary -
                       a.mean_curvature;
  v.capacity_constant = phi.expansion_constant;
  v.conclusion_margin = v.mass - v.capacity_constant;
  v.rigidity_residual = rigidity_residual(a.metric, RigidityModel::SchwarzschildExterior);
  return finish(std::move(v), tol);
}

Verdict check_equivalent_form(const MetricAnalysis& a, double c, const Tolerances& tol) {
  Verdict v = start(a, TheoremId::NormalizedLevel, c);
  require_boundary_value(c, true, tol, v.warnings, "check_equivalent_form");
  // the normalized function is 1 - v, so its normal derivative is -dv/dnu
  const double k = bound_factor(a.metric);
  const double slope = -a.harmonic_green.normal_derivative_at_boundary;
  v.condition_margin = k * (2.0 * c / (1.0 + c)) * slope - a.mean_curvature;
  v.capacity_constant = (1.0 - c) * a.harmonic_green.expansion_constant;
  v.conclusion_margin = v.mass - v.capacity_constant;
  if (c == 1.0) {
    v.rigidity_residual = rigidity_residual(a.metric, RigidityModel::FlatExterior);
    v.implication_margin = k * (a.harmonic_green.normal_derivative_at_boundary -
                                a.conformal_green.normal_derivative_at_boundary);
  } else {
    v.rigidity_residual = rigidity_residual(a.metric, RigidityModel::SchwarzschildExterior);
  }
  return finish(std::move(v), tol);
}

Verdict check_theorem_main(const RadialMetric& g, const TheoremOptions& options) {
  return check_theorem_main(analyze(g, options), options.tolerances);
}
Verdict check_corollary(const RadialMetric& g, const TheoremOptions& options) {
  return check_corollary(analyze(g, options), options.tolerances);
}
Verdict check_mass_capacity(const RadialMetric& g, double c, const TheoremOptions& options) {
  return check_mass_capacity(analyze(g, options), c, options.tolerances);
}
Verdict check_equivalent_form(const RadialMetric& g, double c, const TheoremOptions& options) {
  return check_equivalent_form(analyze(g, options), c, options.tolerances);
}

double schwarzschild_equality_constant(int n, double m, double r0) {
  const double two_area = 2.0 * std::pow(r0, n - 2);
  if (!(two_area + m > 0.0)) {
    throw DomainError(fmt::format(
        "schwarzschild_equality_constant: 2 r0^(n-2) + m = {} must be positive", two_area + m));
  }
  return (two_area - m) / (two_area + m);
}

double rigidity_residual(const RadialMetric& g, RigidityModel model) {
  const double r0 = g.boundary_radius();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double r : sample_radii(r0, 64, 1e3)) {
    const double mu = mass_aspect(g, r);
    lo = std::min(lo, mu);
    hi = std::max(hi, mu);
  }
  const double scale = std::pow(g.areal_radius(r0).value, g.dimension() - 2);
  const double distance = model == RigidityModel::FlatExterior
                              ? std::max(std::abs(lo), std::abs(hi))
                              : 0.5 * (hi - lo);
  return distance / scale;
}

Reduction reduce_to_corollary(const RadialMetric& g, const BVPSolution& phi, double c,
                              const TheoremOptions& options) {
  if (phi.kind != "harmonic-boundary") {
    throw DomainError("reduce_to_corollary: phi must be the boundary-level harmonic function");
  }
  if (c == 1.0 || !(c > -1.0)) {
    throw DomainError(fmt::format("reduce_to_corollary: boundary value c = {} must satisfy c > -1, c != 1", c));
  }
  if (std::abs(phi.boundary_value - c) > 1e-12) {
    throw DomainError(fmt::format("reduce_to_corollary: phi has boundary value {} but c = {}",
                                  phi.boundary_value, c));
  }
  const int n = g.dimension();
  const double h = n - 2.0;
  const double r0 = g.boundary_radius();
  const RadialProfile& f = phi.function;
  for (double r : sample_radii(r0, 97, 1e8)) {
    if (!(f(r).value > -1.0)) {
      throw DomainError(fmt::format("reduce_to_corollary: phi = {} <= -1 at r = {}", f(r).value, r));
    }
  }

  // s = (1 + phi)/2 -> 1, with s - 1 = (phi - 1)/2
  const RadialProfile s(
      r0, 1.0, 0, [f](double r) { return 0.5 * f.deviation(r); },
      TailDescriptor{h, -0.5 * phi.expansion_constant});
  RadialMetric reduced = conformally_rescaled(g, s, fmt::format("{}~reduced(c={})", g.label(), c));

  double residual = 0.0;
  for (double r : sample_radii(r0, 48, 1e4)) {
    residual = std::max(residual, relative_laplacian_residual(reduced, reciprocal(s(r)), r));
  }

  // (1 + c)/(1 - c) (w - 1) = (1 + c)/(1 - c) (1 - s)/s
  const double ratio = (1.0 + c) / (1.0 - c);
  RadialProfile green(
      r0, 0.0, 0,
      [f, ratio](double r) {
        const Jet d = 0.5 * f.deviation(r);
        return ratio * (-d) / (1.0 + d);
      },
      TailDescriptor{h, 0.5 * ratio * phi.expansion_constant});
  const double derivative = normal_derivative(reduced, green(r0), r0);
  BVPSolution v{std::move(green),
                1.0,
                0.5 * ratio * phi.expansion_constant,
                0.5 * std::abs(ratio) * phi.expansion_error,
                residual,
                derivative,
                "harmonic-green"};

  const double mass = estimate_adm_mass(g, options.mass).value;
  const double reduced_mass = estimate_adm_mass(reduced, options.mass).value;
  return Reduction{std::move(reduced),      std::move(v), 1.0 / s(r0).value, residual,
                   reduced_mass,            mass - phi.expansion_constant};
}

RadialMetric harmonic_equality_lift(const RadialMetric& g, const TheoremOptions& options) {
  const double r0 = g.boundary_radius();
  const double H = mean_curvature_sphere(g, r0);
  if (std::abs(H) > 1e-10 * (g.dimension() - 1) / r0) {
    throw DomainError(fmt::format(
        "harmonic_equality_lift: boundary of {} is not minimal (H = {:.3g})", g.label(), H));
  }
  const BVPSolution v = solve_harmonic_green(g, options.solver);
  const RadialProfile vf = v.function;
  const RadialProfile half(
      r0, 1.0, 0, [vf](double r) { return -0.5 * vf(r); },
      TailDescriptor{g.dimension() - 2.0, -0.5 * v.expansion_constant});
  return conformally_rescaled(g, half, fmt::format("{}~equality-lift", g.label()));
}

MinimalBoundaryReport conformal_minimal_boundary_check(const RadialMetric& g,
                                                       const TheoremOptions& options,
                                                       bool solve_identity) {
  const int n = g.dimension();
  const double h = n - 2.0;
  const double r0 = g.boundary_radius();
  const BVPSolution v = solve_harmonic_green(g, options.solver);

  // phi^{-4/(n-2)} g with phi = 2/(1 + v) is 2^{-4/(n-2)} (1 + v)^{4/(n-2)} g;
  // keep the asymptotically flat multiple and rescale lengths afterwards
  const RadialProfile& vf = v.function;
  const RadialProfile lift(r0, 1.0, 0, [vf](double r) { return vf(r); },
                           TailDescriptor{h, v.expansion_constant});
  RadialMetric transformed =
      conformally_rescaled(g, lift, fmt::format("{}~minimal-boundary", g.label()));

  // phi = 2 - w with w the harmonic Green's function of the transformed metric
  double identity = std::numeric_limits<double>::quiet_NaN();
  if (solve_identity) {
    const BVPSolution w = solve_harmonic_green(transformed, options.solver);
    identity = 0.0;
    for (double r : sample_radii(r0, 64, 1e4)) {
      const double p = 2.0 - w.function(r).value;
      identity = std::max(identity, std::abs(p * vf(r).value - (2.0 - p)));
    }
  }

  const double H = mean_curvature_sphere(g, r0);
  const double margin = H + bound_factor(g) * v.normal_derivative_at_boundary;
  const double transformed_H = std::pow(2.0, 2.0 / h) * mean_curvature_sphere(transformed, r0);
  return MinimalBoundaryReport{std::move(transformed), identity, margin, transformed_H,
                               std::abs(transformed_H - margin)};
}

}  // namespace massbound
