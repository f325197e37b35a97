#include "massbound/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "massbound/chebyshev.hpp"
#include "massbound/errors.hpp"
#include "massbound/fit.hpp"

namespace massbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double harmonic_exponent(const RadialMetric& g) { return g.dimension() - 2.0; }

// r as a function of xi = (r0/r)^{(n-2)/2}; infinite at xi = 0.
double radius_of_xi(const RadialMetric& g, double xi) {
  return g.boundary_radius() * std::pow(xi, -2.0 / harmonic_exponent(g));
}

// Relative residual of the radial Laplacian-type equation at radius r.
// Coefficients of the collocated equation for psi = u / t in xi:
//   q xi psi'' + (3 q + xi q') psi' + (2 q' - 4 w xi^3) psi = 0
// with q = sigma^{n-1}/a and w xi^3 = (a sigma^{n-1} kappa R) r^n xi / ((n-2)^2 r0^{n-2}).
struct Coefficients {
  double q;
  double q_xi;
  double w_xi3;
};

Coefficients coefficients(const RadialMetric& g, double xi) {
  if (xi == 0.0) return {1.0, 0.0, 0.0};
  const double r = radius_of_xi(g, xi);
  if (!std::isfinite(r)) return {1.0, 0.0, 0.0};
  const double h = harmonic_exponent(g);
  const Jet q = reciprocal(inverse_flux_density(g, r));
  const double dr_dxi = -(2.0 / h) * r / xi;
  const double potential = conformal_potential(g, r);
  const double w_xi3 =
      potential * std::pow(r, g.dimension()) * xi / (h * h * std::pow(g.boundary_radius(), h));
  return {q.value, q.d1 * dr_dxi, w_xi3};
}

struct Collocation {
  std::vector<double> nodes;
  Eigen::VectorXd psi;
  Eigen::VectorXd psi_xi;
  Eigen::VectorXd psi_xixi;
};

Collocation collocate(const RadialMetric& g, int degree) {
  if (degree < 4) throw DomainError("solve_conformal_green: collocation degree too small");
  Collocation c;
  c.nodes = chebyshev::unit_interval_nodes(degree);
  const Eigen::MatrixXd d1 = chebyshev::differentiation_matrix(degree);
  const Eigen::MatrixXd d2 = chebyshev::second_differentiation_matrix(degree);
  const int size = degree + 1;

  Eigen::MatrixXd a(size, size);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
  for (int j = 0; j < size; ++j) {
    const double xi = c.nodes[j];
    const Coefficients k = coefficients(g, xi);
    a.row(j) = k.q * xi * d2.row(j) + (3.0 * k.q + xi * k.q_xi) * d1.row(j);
    a(j, j) += 2.0 * k.q_xi - 4.0 * k.w_xi3;
  }
  // u = 1 at the boundary, i.e. psi(1) = 1; xi = 1 is node 0
  a.row(0).setZero();
  a(0, 0) = 1.0;
  b(0) = 1.0;

  c.psi = a.partialPivLu().solve(b);
  c.psi_xi = d1 * c.psi;
  c.psi_xixi = d2 * c.psi;
  // The boundary row carries the Dirichlet condition instead of the equation,
  // so D2 psi there is unconstrained and amplifies roundoff like N^4. Every
  // other node satisfies the equation; take the boundary value from it too.
  const Coefficients k = coefficients(g, 1.0);
  c.psi_xixi(0) = -((3.0 * k.q + k.q_xi) * c.psi_xi(0) + (2.0 * k.q_xi - 4.0 * k.w_xi3) * c.psi(0)) / k.q;
  return c;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double relative_laplacian_residual(const RadialMetric& g, const Jet& f, double r, double potential_term) {
  const Jet a = g.stretch(r);
  const Jet rho = g.areal_radius(r);
  const double drift = (g.dimension() - 1) * rho.d1 / rho.value - a.d1 / a.value;
  const double a2 = a.value * a.value;
  const double lap = (f.d2 + drift * f.d1) / a2;
  const double scale = (std::abs(f.d2) + std::abs(drift * f.d1)) / a2 + std::abs(potential_term);
  if (scale == 0.0) return 0.0;
  return std::abs(lap - potential_term) / scale;
}

BVPSolution solve_harmonic_green(const RadialMetric& g, const SolverOptions& options) {
  const double h = harmonic_exponent(g);
  const double r0 = g.boundary_radius();

  // dv/dt = f / J(1) with f = a / sigma^{n-1} and t = xi^2
  auto integrand = [g](double xi) {
    if (xi < 1e-150) return 0.0;
    const double r = radius_of_xi(g, xi);
    if (!std::isfinite(r)) return 2.0 * xi;
    return inverse_flux_density(g, r).value * 2.0 * xi;
  };
  const Quadrature total = integrate(integrand, 0.0, 1.0, options.quadrature_tolerance);
  if (!std::isfinite(total.value) || !(total.value > 0.0) ||
      total.error_estimate > 1e-6 * total.value) {
    throw SolverError(fmt::format(
        "solve_harmonic_green: capacity integral did not converge for {} (value {}, error {})",
        g.label(), total.value, total.error_estimate));
  }
  const double j1 = total.value;
  const double tol = options.quadrature_tolerance;

  auto evaluator = [g, integrand, j1, h, r0, tol](double r) {
    const double t = std::pow(r0 / r, h);
    const double xi = std::sqrt(t);
    double value;
    if (r == r0) {
      value = 1.0;
    } else if (xi > 0.5) {
      value = 1.0 - integrate(integrand, xi, 1.0, tol).value / j1;
    } else {
      value = integrate(integrand, 0.0, xi, tol).value / j1;
    }
    const Jet f = inverse_flux_density(g, r);
    const double t_r = -h * t / r;
    const double t_rr = h * (h + 1.0) * t / (r * r);
    return Jet{value, f.value * t_r / j1, (f.d1 * t_r + f.value * t_rr) / j1};
  };

  const double capacity = std::pow(r0, h) / j1;
  RadialProfile v(r0, 0.0, 0, evaluator, TailDescriptor{h, capacity});

  double residual = 0.0;
  for (double r : sample_radii(r0, 16, 1e4)) {
    residual = std::max(residual, relative_laplacian_residual(g, v(r), r, 0.0));
  }
  const double derivative = normal_derivative(g, v(r0), r0);
  return {std::move(v),
          1.0,
          capacity,
          capacity * total.error_estimate / j1,
          residual,
          derivative,
          "harmonic-green"};
}

BVPSolution solve_conformal_green(const RadialMetric& g, const SolverOptions& options) {
  const double h = harmonic_exponent(g);
  const double r0 = g.boundary_radius();
  const int degree = options.collocation_degree;

  // Double the degree until the profile, slope profile and expansion constant
  // agree with the previous rung; the last change is the error estimate.
  const double r0h = std::pow(r0, h);
  Collocation fine = collocate(g, std::min(degree, options.min_collocation_degree));
  double error = kInf;
  for (int n_deg = 2 * options.min_collocation_degree; n_deg <= degree; n_deg *= 2) {
    Collocation next = collocate(g, n_deg);
    const double coarse_constant = fine.psi(fine.psi.size() - 1);
    const double change = std::abs(next.psi(n_deg) - coarse_constant);
    error = r0h * change;
    const auto weights = chebyshev::barycentric_weights(static_cast<int>(fine.psi.size()) - 1);
    const std::span<const double> psi(fine.psi.data(), fine.psi.size());
    const std::span<const double> slope(fine.psi_xi.data(), fine.psi_xi.size());
    double profile_change = 0.0, slope_change = 0.0;
    for (int j = 0; j <= n_deg; ++j) {
      const double x = next.nodes[j];
      profile_change = std::max(
          profile_change, std::abs(chebyshev::interpolate(fine.nodes, weights, psi, x) - next.psi(j)));
      slope_change = std::max(slope_change, std::abs(chebyshev::interpolate(fine.nodes, weights, slope, x) -
                                                     next.psi_xi(j)));
    }
    const double tol = options.adaptive_tolerance;
    if (change <= tol * std::abs(coarse_constant) &&
        profile_change <= tol * fine.psi.cwiseAbs().maxCoeff() &&
        slope_change <= tol * (1.0 + fine.psi_xi.cwiseAbs().maxCoeff())) {
      fine = std::move(next);
      break;
    }
    fine = std::move(next);
  }
  const int used = static_cast<int>(fine.psi.size()) - 1;
  for (int j = 0; j <= used; ++j) {
    if (!(fine.psi(j) > 0.0)) {
      throw SolverError(fmt::format(
          "solve_conformal_green: solution changes sign at xi = {} for {}; the conformal "
          "Laplacian is not positive on this metric",
          fine.nodes[j], g.label()));
    }
  }
  const double constant = r0h * fine.psi(used);
  if (!std::isfinite(error)) {
    const Collocation coarse = collocate(g, std::max(4, used / 2));
    error = r0h * std::abs(coarse.psi(coarse.psi.size() - 1) - fine.psi(used));
  }

  auto interp = std::make_shared<CompactifiedInterpolant>(
      g.dimension(), r0, fine.nodes, to_std(fine.psi), to_std(fine.psi_xi),
      to_std(fine.psi_xixi));

  auto evaluator = [interp, r0h, h](double r) {
    const Jet t = r0h * radius_power(r, -h);
    return t * interp->at_radius(r);
  };
  RadialProfile u(r0, 0.0, 0, evaluator, TailDescriptor{h, constant});

  // residual between nodes, where the polynomial is not forced to satisfy
  // the equation
  double residual = 0.0;
  for (int j = 0; j < used; ++j) {
    const double c = std::cos(0.5 * std::numbers::pi * (j + 0.5) / used);
    const double xi = c * c;
    const auto psi = interp->at_xi(xi);
    const Coefficients k = coefficients(g, xi);
    const double t2 = k.q * xi * psi.d2;
    const double t1 = (3.0 * k.q + xi * k.q_xi) * psi.d1;
    const double t0 = (2.0 * k.q_xi - 4.0 * k.w_xi3) * psi.value;
    const double scale = std::abs(t2) + std::abs(t1) + std::abs(t0) + std::abs(psi.value);
    residual = std::max(residual, std::abs(t2 + t1 + t0) / scale);
  }

  const double derivative = normal_derivative(g, u(r0), r0);
  return {std::move(u), 1.0, constant, error, residual, derivative, "conformal-green"};
}

BVPSolution harmonic_with_boundary(const BVPSolution& green, double c) {
  if (!(c > -1.0)) {
    throw DomainError(fmt::format("harmonic_with_boundary: boundary value c = {} must exceed -1", c));
  }
  const double r0 = green.function.domain_start();
  const double scale = 1.0 - c;
  if (scale == 0.0) {
    return {RadialProfile::constant(r0, 1.0), 1.0, 0.0, 0.0, 0.0, 0.0, "harmonic-boundary"};
  }
  const RadialProfile v = green.function;
  RadialProfile phi(
      r0, 1.0, 0, [v, scale](double r) { return -scale * v.deviation(r); },
      TailDescriptor{v.tail().exponent, -scale * v.tail().coefficient});
  return {std::move(phi),
          c,
          scale * green.expansion_constant,
          std::abs(scale) * green.expansion_error,
          green.residual_norm,
          -scale * green.normal_derivative_at_boundary,
          "harmonic-boundary"};
}

BVPSolution solve_harmonic_with_boundary(const RadialMetric& g, double c,
                                         const SolverOptions& options) {
  if (!(c > -1.0)) {
    throw DomainError(
        fmt::format("solve_harmonic_with_boundary: boundary value c = {} must exceed -1", c));
  }
  if (c == 1.0) {
    return {RadialProfile::constant(g.boundary_radius(), 1.0), 1.0, 0.0, 0.0, 0.0, 0.0,
            "harmonic-boundary"};
  }
  return harmonic_with_boundary(solve_harmonic_green(g, options), c);
}

ExpansionFit expansion_constant(const BVPSolution& s, const RadialMetric& g) {
  const double h = harmonic_exponent(g);
  const double k = std::abs(s.expansion_constant);
  if (k == 0.0) return {s.expansion_constant, kInf, false};

  const double noise = 1e3 * s.expansion_error + 1e-12 * k;
  std::vector<RadialSample> samples;
  for (double r : sample_radii(20.0 * g.boundary_radius(), 12, 1e3)) {
    const double scaled = std::abs(s.function.deviation(r).value) * std::pow(r, h);
    const double correction = scaled - k;
    if (std::abs(correction) > noise) samples.push_back({r, correction});
  }
  if (samples.size() < 4) return {s.expansion_constant, kInf, false};
  // the correction may change sign once near r0; fit the far samples only
  const bool far_sign = samples.back().value > 0.0;
  std::vector<RadialSample> tail;
  for (auto it = samples.rbegin(); it != samples.rend() && ((it->value > 0.0) == far_sign); ++it) {
    tail.push_back(*it);
  }
  if (tail.size() < 4) return {s.expansion_constant, kInf, false};
  const PowerLawFit fit = decay_order_fit(tail);
  const double gamma = h + fit.exponent;
  return {s.expansion_constant, gamma, gamma <= h + 0.05};
}

double normal_derivative_at_boundary(const BVPSolution& s, const RadialMetric& g) {
  const double r0 = g.boundary_radius();
  return normal_derivative(g, s.function(r0), r0);
}

}  // namespace massbound
