#pragma once

#include <vector>

#include "massbound/elliptic.hpp"
#include "massbound/metric.hpp"

namespace massbound {

/// Scalar curvature of u^{4/(n-2)} g from R, u and the g-Laplacian of u.
double conformal_scalar_curvature(double scalar, double factor, double factor_laplacian,
                                  int dimension);

/// Mean curvature of a hypersurface after g -> u^{4/(n-2)} g. Without flip the
/// normal keeps its orientation; with flip the result is for the reversed
/// normal, as on the filled-in side of the gluing.
double conformal_mean_curvature(double mean_curvature, double factor, double factor_normal_derivative,
                                int dimension, bool flip_normal);

/// Coefficients of the metric in Kelvin coordinates y = x/|x|^2 at one |y|.
///
/// Radial symmetry leaves two eigenvalues, radial and tangential. `weighted_*`
/// are the eigenvalues of u^{4/(n-2)} h.
struct KelvinSample {
  double y;
  double radial;
  double tangential;
  double weighted_radial;
  double weighted_tangential;
  /// max over entries of |d/dy (u^{4/(n-2)} h_ij)|, built from the eigenvalue
  /// derivatives and the angular term |lambda_r - lambda_t| / |y|.
  double weighted_derivative;
  /// Size of the separate factor and metric contributions to that derivative.
  double derivative_scale;
};

KelvinSample kelvin_coefficients(const RadialMetric& metric, const BVPSolution& green,
                                 double y_radius);

struct KelvinReport {
  std::vector<double> radii;  // |y|
  /// ||h - |y|^{-4} delta|| at each radius.
  std::vector<double> coefficient_deviation;
  std::vector<double> weighted_derivative;

  /// Fitted e in deviation ~ |y|^e, and the claimed tau - 4.
  double deviation_exponent;
  double claimed_deviation_exponent;
  /// Fitted e in derivative ~ |y|^e, and the claimed gamma - n + 1 with
  /// gamma = min(q - 2, n + tau - 2, n - 1).
  double derivative_exponent;
  double claimed_derivative_exponent;
  /// The weighted derivative is zero to round-off relative to its cancelling
  /// parts (the fill-in is exactly a round ball); exponent reported as infinity.
  bool derivative_exact;

  /// Limit of the weighted coefficients: D^{4/(n-2)}.
  double weighted_limit;
  /// Relative distance of the weighted eigenvalues from the limit at the
  /// smallest sampled |y|.
  double continuity_gap;
  /// Largest p (capped) for which dyadic-shell integrals of |dh|^p decay.
  double sobolev_exponent_estimate;
};

struct CornerData {
  double exterior;  // H of the boundary sphere in (M, g)
  double interior;  // H of the same sphere seen from the fill-in
};

struct FillInOptions {
  double residual_tolerance = 1e-6;
  /// Interior curvature is sampled on t = (r0/r)^{n-2} in [t_min, 1].
  double t_min = 1e-4;
  int samples = 64;
  double sobolev_cap = 64.0;
};

/// The exterior (M, g) glued along the boundary to the one-point
/// compactification of (M, u^{4/(n-2)} g).
struct FillIn {
  RadialMetric exterior;
  BVPSolution green;
  CornerData corner;
  /// max of rho~^2 |R~| over the interior sample, dimensionless.
  double interior_scalar_residual;
  KelvinReport compactified_point_report;
};

FillIn build_fill_in(const RadialMetric& metric, const BVPSolution& green,
                     const FillInOptions& options = {});

KelvinReport fill_in_regularity_diagnostic(const RadialMetric& metric, const BVPSolution& green,
                                           const FillInOptions& options = {});
inline KelvinReport fill_in_regularity_diagnostic(const FillIn& fill_in,
                                                  const FillInOptions& options = {}) {
  return fill_in_regularity_diagnostic(fill_in.exterior, fill_in.green, options);
}

struct CornerVerdict {
  bool holds;
  double margin;  // H_interior - H_exterior
};
CornerVerdict corner_condition(const FillIn& fill_in, double tolerance = 1e-8);

/// Mismatch of normal derivatives of u (outside) and 1/u (inside, w.r.t. the
/// fill-in's normal) across the boundary.
double glued_normal_jump(const FillIn& fill_in);

}  // namespace massbound
