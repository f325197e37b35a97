#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "massbound/profile.hpp"

namespace massbound {

/// g = U^{4/(n-2)} delta on the exterior of a ball.
struct ConformallyFlat {
  RadialProfile factor;
};

/// g = a(r)^2 dr^2 + rho(r)^2 dOmega^2.
struct WarpedProduct {
  RadialProfile stretch;
  RadialProfile areal_radius;
};

/// A rotationally symmetric asymptotically flat metric on {|x| >= r0} in R^n.
///
/// The frame accessors return the two warping functions a (radial stretch)
/// and rho (areal radius) for either representation, so geometry code never
/// needs to branch on the form. Deviations a - 1 and rho - r are available
/// separately and are computed without cancellation.
class RadialMetric {
 public:
  using Form = std::variant<ConformallyFlat, WarpedProduct>;

  RadialMetric(int dimension, double boundary_radius, Form form, double decay_order,
               double scalar_decay_order, std::string label);

  int dimension() const { return dimension_; }
  double boundary_radius() const { return boundary_radius_; }
  const Form& form() const { return form_; }
  bool conformally_flat() const { return std::holds_alternative<ConformallyFlat>(form_); }
  /// Conformal factor U; only valid for the conformally flat form.
  const RadialProfile& conformal_factor() const;
  double decay_order() const { return decay_order_; }
  double scalar_decay_order() const { return scalar_decay_order_; }
  const std::string& label() const { return label_; }

  /// 2/(n-2), the exponent relating U to the metric coefficients.
  double conformal_exponent() const { return 2.0 / (dimension_ - 2); }

  Jet stretch(double r) const;                  // a
  Jet stretch_deviation(double r) const;        // a - 1
  Jet areal_radius(double r) const;             // rho
  Jet areal_radius_deviation(double r) const;   // rho - r
  Jet areal_ratio_deviation(double r) const;    // rho/r - 1

  /// Copy with a different inner radius (same profiles).
  RadialMetric restricted_to(double new_boundary_radius) const;

 private:
  int dimension_;
  double boundary_radius_;
  Form form_;
  double decay_order_;
  double scalar_decay_order_;
  std::string label_;
};

/// Mean curvature and normal derivatives at the inner boundary sphere.
struct BoundaryData {
  double mean_curvature;
  std::map<std::string, double> normal_derivatives;
  /// rho(r0)/r0: the induced metric on the boundary is this squared times
  /// the round metric of radius r0.
  double area_element_factor;
};

// ---- constructors -------------------------------------------------------

RadialMetric flat_metric(int dimension, double boundary_radius);
RadialMetric schwarzschild(int dimension, double mass, double boundary_radius);
/// U = 1 + sum_k c_k r^{-p_k}.
RadialMetric power_sum_metric(int dimension, double boundary_radius,
                              std::vector<PowerTerm> terms, std::string label = "power-sum");
RadialMetric warped_metric(int dimension, double boundary_radius, RadialProfile stretch,
                           RadialProfile areal_radius, double decay_order,
                           double scalar_decay_order, std::string label);
/// Schwarzschild in areal gauge: a = (1 - 2m/R^{n-2})^{-1/2}, rho = R.
RadialMetric schwarzschild_areal(int dimension, double mass, double boundary_radius);
/// The same Riemannian manifold as a conformally flat metric, written in the
/// radial coordinate s with r(s) = s + kappa s^{1-sigma}. Gives a warped
/// product that is not conformally flat in its own coordinates.
RadialMetric reparametrized(const RadialMetric& conformally_flat, double kappa, double sigma);
/// factor^{4/(n-2)} g, keeping the form of g. The factor must tend to 1; the
/// decay order becomes the smaller of the two, and the scalar decay order is
/// kept, which is right when the factor is harmonic for g.
RadialMetric conformally_rescaled(const RadialMetric& metric, const RadialProfile& factor,
                                  std::string label);
/// Radius of the new coordinate s that maps to the original boundary radius.
double reparametrized_boundary(double boundary_radius, double kappa, double sigma);

struct GeneratorParams {
  int dimension = 3;
  double boundary_radius = 1.0;
  int num_terms = 2;
  /// Exponents p_k; p = n-2 terms are harmonic and enter with + sign,
  /// faster-decaying terms enter with - sign so that Delta U <= 0.
  std::pair<double, double> exponent_range{1.5, 4.0};
  /// Magnitudes |c_k|.
  std::pair<double, double> coeff_range{0.0, 0.5};
  /// Optional mass term m/(2 r^{n-2}); m may be negative.
  std::pair<double, double> mass_range{0.0, 0.0};
  /// Lower bound enforced on U(r0).
  double boundary_floor = 0.2;
};

/// Conformally flat metric with non-negative scalar curvature, deterministic
/// per seed.
RadialMetric random_nonneg_scalar_metric(std::uint64_t seed, const GeneratorParams& params);

/// Default generator parameters for a dimension (exponent window [n-1.5, n+1]).
GeneratorParams default_generator(int dimension, double boundary_radius = 1.0);

// ---- geometry -----------------------------------------------------------

double scalar_curvature(const RadialMetric& metric, double r);
/// a * sigma^{n-1} * (n-2)/(4(n-1)) * R with sigma = rho/r: the zeroth-order
/// coefficient of the conformal Laplacian in flux form.
double conformal_potential(const RadialMetric& metric, double r);
/// a / sigma^{n-1}, the integrand of the capacity integral in t.
Jet inverse_flux_density(const RadialMetric& metric, double r);

/// Mean curvature of the coordinate sphere w.r.t. the infinity-pointing normal.
double mean_curvature_sphere(const RadialMetric& metric, double r);
/// A radius in [lo, hi] where the mean curvature of the coordinate sphere
/// vanishes; DomainError unless it changes sign on the bracket.
double minimal_sphere_radius(const RadialMetric& metric, double lo, double hi);
/// f'(r)/a(r).
double normal_derivative(const RadialMetric& metric, const Jet& f, double r);
/// Laplace-Beltrami operator of a radial function.
double laplacian(const RadialMetric& metric, const Jet& f, double r);
/// rho^{n-2}(1 - |d rho/ds|^2)/2: gauge invariant, equals m on Schwarzschild.
double mass_aspect(const RadialMetric& metric, double r);
/// The ADM flux integral at radius r, normalized so its limit is the mass.
double flux_mass(const RadialMetric& metric, double r);

BoundaryData boundary_data(const RadialMetric& metric,
                           const std::map<std::string, RadialProfile>& functions);

struct MassOptions {
  int levels = 90;
  double relative_tolerance = 1e-8;
};

struct MassEstimate {
  double value;
  double error_estimate;
  double fitted_order;
  bool converged;
};

/// ADM mass with an extrapolation error estimate; never throws on
/// non-convergence (converged = false instead).
MassEstimate estimate_adm_mass(const RadialMetric& metric, const MassOptions& options = {});
/// ADM mass; throws ExtrapolationError if the estimate misses tolerance.
double adm_mass(const RadialMetric& metric, const MassOptions& options = {});

/// Least-squares decay exponent of |g - delta| over radii r0 * [1e2, 1e6].
double fitted_decay_order(const RadialMetric& metric);

/// count geometrically spaced radii from r0 to r0 * span.
std::vector<double> sample_radii(double r0, int count, double span = 1e4);

}  // namespace massbound
