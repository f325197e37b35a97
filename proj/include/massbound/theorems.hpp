#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "massbound/elliptic.hpp"
#include "massbound/metric.hpp"

namespace massbound {

/// The mass inequalities that can be checked on a radial metric.
enum class TheoremId {
  /// H <= -(n-1)/(n-2) du/dnu with u the conformal Green's function; m >= 0.
  ConformalGreen,
  /// The same bound with the harmonic Green's function v; m >= 0.
  HarmonicGreen,
  /// H <= 0; m >= capacity.
  MassCapacity,
  /// Boundary-value form with phi = c on the boundary; m >= C.
  BoundaryLevel,
  /// Normalized form with the phi = 0 solution and a free constant c; m >= (1 - c) capacity.
  NormalizedLevel,
};

std::string_view to_string(TheoremId id);

/// Absolute tolerances on the margins.
struct Tolerances {
  double hypothesis = 1e-8;
  double conclusion = 1e-6;
  double equality = 1e-6;
  /// Boundary constants above this only add a conditioning warning.
  double large_boundary_value = 1e3;
};

struct EqualityFlags {
  bool hypothesis = false;
  bool conclusion = false;
};

/// Numerical verdict on one theorem for one metric.
///
/// condition_margin is RHS - LHS of the hypothesis written as an upper bound
/// on H (so it is in units of mean curvature and >= 0 means the hypothesis
/// holds). conclusion_margin is mass - bound.
struct Verdict {
  TheoremId theorem;
  double boundary_value;  // c, or NaN when the theorem has none
  double condition_margin;
  double mass;
  double mass_error;
  double capacity_constant;
  double conclusion_margin;
  EqualityFlags equality;
  /// Distance from the rigidity family (flat exterior or Schwarzschild).
  double rigidity_residual;
  /// Harmonic-Green form only: u-margin minus v-margin, >= 0 by comparison.
  double implication_margin;
  bool hypothesis_holds;
  bool conclusion_holds;
  /// Hypothesis holds but the conclusion fails beyond tolerance.
  bool soundness_violation;
  std::vector<std::string> warnings;

  bool equality_case() const { return equality.hypothesis && equality.conclusion; }
};

/// Solutions shared by every check on one metric.
struct MetricAnalysis {
  RadialMetric metric;
  double mean_curvature;
  BVPSolution conformal_green;
  BVPSolution harmonic_green;
  MassEstimate mass;
  /// min of R rho^2 over the sampled radii.
  double min_scaled_scalar_curvature;
};

struct TheoremOptions {
  Tolerances tolerances;
  SolverOptions solver;
  MassOptions mass;
};

/// Rejects metrics with R < 0 at any sampled radius (DomainError).
MetricAnalysis analyze(const RadialMetric& metric, const TheoremOptions& options = {});

Verdict check_theorem_main(const MetricAnalysis& analysis, const Tolerances& tolerances = {});
Verdict check_corollary(const MetricAnalysis& analysis, const Tolerances& tolerances = {});
/// c > -1 and c != 1.
Verdict check_mass_capacity(const MetricAnalysis& analysis, double c,
                            const Tolerances& tolerances = {});
/// c > -1; c = 1 reproduces check_corollary's margins.
Verdict check_equivalent_form(const MetricAnalysis& analysis, double c,
                              const Tolerances& tolerances = {});

Verdict check_theorem_main(const RadialMetric& metric, const TheoremOptions& options = {});
Verdict check_corollary(const RadialMetric& metric, const TheoremOptions& options = {});
Verdict check_mass_capacity(const RadialMetric& metric, double c,
                            const TheoremOptions& options = {});
Verdict check_equivalent_form(const RadialMetric& metric, double c,
                              const TheoremOptions& options = {});

/// The boundary value at which Schwarzschild(n, m, r0) attains equality in
/// the boundary-level form: (2 r0^{n-2} - m) / (2 r0^{n-2} + m).
double schwarzschild_equality_constant(int dimension, double mass, double boundary_radius);

enum class RigidityModel { FlatExterior, SchwarzschildExterior };

/// Sup over sampled radii of |mass aspect - best model mass|, divided by
/// rho(r0)^{n-2}. The mass aspect is gauge invariant and constant exactly on
/// the model family (zero for the flat exterior), so the best Schwarzschild
/// mass is the midrange of the samples.
double rigidity_residual(const RadialMetric& metric, RigidityModel model);

/// The metric ((1 + phi)/2)^{4/(n-2)} g and the rescaled harmonic function
/// (1 + c)/(1 - c) (w - 1), w = 2/(1 + phi), which is its harmonic Green's
/// function.
struct Reduction {
  RadialMetric metric;
  BVPSolution green;
  double boundary_w;
  /// max relative residual of the Laplacian of w in the new metric.
  double harmonic_residual;
  /// m(new metric) computed independently, and m - C predicted.
  double reduced_mass;
  double predicted_mass;
};

/// phi must be the boundary-level solution with phi = c on the boundary.
Reduction reduce_to_corollary(const RadialMetric& metric, const BVPSolution& phi, double c,
                              const TheoremOptions& options = {});

/// (1 - v/2)^{4/(n-2)} g with v the harmonic Green's function of g. When the
/// boundary of g is minimal, the boundary of the result satisfies
/// H = -(n-1)/(n-2) dv/dnu exactly (equality in the harmonic Green's function
/// form); R stays >= 0 because the factor is harmonic. DomainError if |H| at
/// the boundary exceeds 1e-10 (n-1)/r0.
RadialMetric harmonic_equality_lift(const RadialMetric& metric, const TheoremOptions& options = {});

/// Conformal transformation to a metric in which the boundary is minimal.
///
/// With v the harmonic Green's function of g, phi = 2/(1 + v) is harmonic for
/// g~ = phi^{-4/(n-2)} g, equals 1 on the boundary and tends to 2. The report
/// solves that problem on g~ independently and compares.
struct MinimalBoundaryReport {
  RadialMetric transformed;
  /// sup |phi v - (2 - phi)| with phi solved on the transformed metric.
  double identity_residual;
  /// H + (n-1)/(n-2) dv/dnu, zero exactly in the equality case.
  double equality_margin;
  /// Mean curvature of the boundary in the transformed metric, and its
  /// mismatch with equality_margin (they agree since phi = 1 there).
  double transformed_mean_curvature;
  double transformed_mean_curvature_residual;
};

/// With solve_identity = false the independent solve is skipped and
/// identity_residual is NaN. The solve nests quadratures, which gets slow on
/// metrics that are themselves built from a Green's function.
MinimalBoundaryReport conformal_minimal_boundary_check(const RadialMetric& metric,
                                                       const TheoremOptions& options = {},
                                                       bool solve_identity = true);

}  // namespace massbound
