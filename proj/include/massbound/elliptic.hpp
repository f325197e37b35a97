#pragma once

#include <string>

#include "massbound/metric.hpp"
#include "massbound/profile.hpp"

namespace massbound {

/// Solution of one of the radial boundary-value problems on [r0, inf).
struct BVPSolution {
  RadialProfile function;
  double boundary_value;
  /// Coefficient of r^{2-n} in the decaying part (D for u, the capacity for v,
  /// C for phi).
  double expansion_constant;
  double expansion_error;
  /// Relative ODE residual at check points between collocation nodes, or of
  /// the first integral for quadrature solutions.
  double residual_norm;
  double normal_derivative_at_boundary;
  std::string kind;
};

struct SolverOptions {
  /// Largest Chebyshev degree for the conformal problem. The solver doubles
  /// from min_collocation_degree until the profile, the expansion constant and
  /// the boundary slope change by less than adaptive_tolerance (relative); the last change
  /// is the reported error estimate.
  int collocation_degree = 256;
  int min_collocation_degree = 16;
  double adaptive_tolerance = 1e-11;
  // level-to-level termination threshold; the attained error is far smaller
  double quadrature_tolerance = 1e-9;
  /// Bound on residual_norm for a solution to count as healthy.
  double residual_tolerance = 1e-6;
};

/// v with Delta v = 0, v = 1 on the boundary, v -> 0 at infinity, from the
/// first integral (rho^{n-1}/a) v' = const evaluated by quadrature.
BVPSolution solve_harmonic_green(const RadialMetric& metric, const SolverOptions& options = {});

/// u with Delta u - (n-2)/(4(n-1)) R u = 0, u = 1 on the boundary, u -> 0 at
/// infinity, by Chebyshev collocation in xi = (r0/r)^{(n-2)/2} for u/t.
BVPSolution solve_conformal_green(const RadialMetric& metric, const SolverOptions& options = {});

/// phi harmonic with phi = c on the boundary, phi -> 1 at infinity; equals
/// 1 - (1 - c) v. c = 1 gives the constant solution.
BVPSolution solve_harmonic_with_boundary(const RadialMetric& metric, double c,
                                         const SolverOptions& options = {});
/// Same, reusing an existing harmonic Green's function.
BVPSolution harmonic_with_boundary(const BVPSolution& green, double c);

struct ExpansionFit {
  double constant;
  /// Fitted gamma in f = K r^{2-n} + O(r^{-gamma}); infinite when no
  /// correction is visible above round-off.
  double subleading_order;
  /// Set when the fitted gamma does not exceed n - 2.
  bool decay_warning;
};

/// Reads the decaying part f - f_inf as K r^{2-n} plus a power-law correction.
ExpansionFit expansion_constant(const BVPSolution& solution, const RadialMetric& metric);

/// |Delta f - potential| divided by the sum of magnitudes of the terms of
/// Delta f and of the potential, at one radius.
double relative_laplacian_residual(const RadialMetric& metric, const Jet& f, double r,
                                   double potential_term = 0.0);

/// f'(r0)/a(r0).
double normal_derivative_at_boundary(const BVPSolution& solution, const RadialMetric& metric);

}  // namespace massbound
