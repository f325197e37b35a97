#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "massbound/errors.hpp"
#include "massbound/fit.hpp"
#include "massbound/metric.hpp"

namespace massbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

// Sample points used to validate positivity/monotonicity at construction.
std::vector<double> validation_radii(double r0) {
  return sample_radii(r0, 97, 1e8);
}

}  // namespace

std::vector<double> sample_radii(double r0, int count, double span) {
  std::vector<double> radii(count);
  for (int i = 0; i < count; ++i) {
    const double x = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    radii[i] = r0 * std::pow(span, x);
  }
  return radii;
}

RadialMetric::RadialMetric(int dimension, double boundary_radius, Form form, double decay_order,
                           double scalar_decay_order, std::string label)
    : dimension_(dimension),
      boundary_radius_(boundary_radius),
      form_(std::move(form)),
      decay_order_(decay_order),
      scalar_decay_order_(scalar_decay_order),
      label_(std::move(label)) {
  require(dimension_ >= 3, "RadialMetric: dimension must be at least 3");
  require(boundary_radius_ > 0.0, "RadialMetric: boundary radius must be positive");
  require(decay_order_ > 0.5 * (dimension_ - 2),
          fmt::format("RadialMetric: decay order {} must exceed (n-2)/2 = {}", decay_order_,
                      0.5 * (dimension_ - 2)));
  require(scalar_decay_order_ > dimension_,
          fmt::format("RadialMetric: scalar decay order {} must exceed n = {}",
                      scalar_decay_order_, dimension_));

  if (const auto* cf = std::get_if<ConformallyFlat>(&form_)) {
    require(cf->factor.baseline_power() == 0 && cf->factor.baseline_coefficient() == 1.0,
            "RadialMetric: conformal factor must tend to 1");
    for (double r : validation_radii(boundary_radius_)) {
      const double u = cf->factor(r).value;
      require(std::isfinite(u) && u > 0.0,
              fmt::format("RadialMetric: conformal factor U({}) = {} is not positive", r, u));
    }
  } else {
    const auto& wp = std::get<WarpedProduct>(form_);
    require(wp.stretch.baseline_power() == 0 && wp.stretch.baseline_coefficient() == 1.0,
            "RadialMetric: radial stretch must tend to 1");
    require(wp.areal_radius.baseline_power() == 1 && wp.areal_radius.baseline_coefficient() == 1.0,
            "RadialMetric: areal radius must be asymptotic to r");
    for (double r : validation_radii(boundary_radius_)) {
      const Jet a = wp.stretch(r);
      const Jet rho = wp.areal_radius(r);
      require(a.value > 0.0, fmt::format("RadialMetric: stretch a({}) is not positive", r));
      require(rho.value > 0.0 && rho.d1 > 0.0,
              fmt::format("RadialMetric: areal radius not positive increasing at r = {}", r));
    }
  }
}

const RadialProfile& RadialMetric::conformal_factor() const {
  const auto* cf = std::get_if<ConformallyFlat>(&form_);
  if (cf == nullptr) throw DomainError("conformal_factor: metric is not conformally flat");
  return cf->factor;
}

Jet RadialMetric::stretch(double r) const { return 1.0 + stretch_deviation(r); }

Jet RadialMetric::stretch_deviation(double r) const {
  if (const auto* cf = std::get_if<ConformallyFlat>(&form_)) {
    return pow1p_minus_one(cf->factor.deviation(r), conformal_exponent());
  }
  return std::get<WarpedProduct>(form_).stretch.deviation(r);
}

Jet RadialMetric::areal_radius(double r) const {
  return Jet::variable(r) + areal_radius_deviation(r);
}

Jet RadialMetric::areal_radius_deviation(double r) const {
  if (conformally_flat()) return Jet::variable(r) * stretch_deviation(r);
  return std::get<WarpedProduct>(form_).areal_radius.deviation(r);
}

Jet RadialMetric::areal_ratio_deviation(double r) const {
  if (conformally_flat()) return stretch_deviation(r);
  return areal_radius_deviation(r) / Jet::variable(r);
}

RadialMetric RadialMetric::restricted_to(double new_boundary_radius) const {
  return RadialMetric(dimension_, new_boundary_radius, form_, decay_order_, scalar_decay_order_,
                      label_);
}

// ---- constructors ---------------------------------------------------------

RadialMetric conformally_rescaled(const RadialMetric& g, const RadialProfile& factor,
                                  std::string label) {
  require(factor.baseline_power() == 0 && factor.baseline_coefficient() == 1.0,
          "conformally_rescaled: factor must tend to 1 at infinity");
  require(factor.domain_start() <= g.boundary_radius() * (1.0 + 1e-12),
          "conformally_rescaled: factor is not defined on the whole exterior");
  const double beta = g.conformal_exponent();
  const double tau =
      factor.tail().exponent > 0.0 ? std::min(g.decay_order(), factor.tail().exponent) : g.decay_order();
  const double r0 = g.boundary_radius();

  if (g.conformally_flat()) {
    const RadialProfile base = g.conformal_factor();
    RadialProfile product(
        r0, 1.0, 0,
        [base, factor](double r) {
          const Jet du = base.deviation(r);
          const Jet ds = factor.deviation(r);
          return du + ds + du * ds;
        },
        TailDescriptor{tau, (base.tail().exponent == tau ? base.tail().coefficient : 0.0) +
                                (factor.tail().exponent == tau ? factor.tail().coefficient : 0.0)});
    return RadialMetric(g.dimension(), r0, ConformallyFlat{std::move(product)}, tau,
                        g.scalar_decay_order(), std::move(label));
  }
  // a and rho both scale by factor^beta
  auto scale = [factor, beta](double r) { return pow1p_minus_one(factor.deviation(r), beta); };
  RadialProfile stretch(
      r0, 1.0, 0,
      [g, scale](double r) {
        const Jet da = g.stretch_deviation(r);
        const Jet e = scale(r);
        return da + e + da * e;
      },
      TailDescriptor{tau, 0.0});
  RadialProfile rho(
      r0, 1.0, 1,
      [g, scale](double r) { return g.areal_radius_deviation(r) + g.areal_radius(r) * scale(r); },
      TailDescriptor{tau - 1.0, 0.0});
  return warped_metric(g.dimension(), r0, std::move(stretch), std::move(rho), tau,
                       g.scalar_decay_order(), std::move(label));
}


RadialMetric flat_metric(int dimension, double boundary_radius) {
  return RadialMetric(dimension, boundary_radius,
                      ConformallyFlat{RadialProfile::constant(boundary_radius, 1.0)}, kInf, kInf,
                      "flat");
}

RadialMetric schwarzschild(int dimension, double mass, double boundary_radius) {
  require(dimension >= 3, "schwarzschild: dimension must be at least 3");
  require(boundary_radius > 0.0, "schwarzschild: boundary radius must be positive");
  const double boundary_value = 1.0 + mass / (2.0 * std::pow(boundary_radius, dimension - 2));
  require(boundary_value > 0.0,
          fmt::format("schwarzschild: U(r0) = {} <= 0, metric degenerate at the boundary",
                      boundary_value));
  return power_sum_metric(dimension, boundary_radius, {{0.5 * mass, double(dimension - 2)}},
                          fmt::format("schwarzschild(m={})", mass));
}

RadialMetric power_sum_metric(int dimension, double boundary_radius, std::vector<PowerTerm> terms,
                              std::string label) {
  require(dimension >= 3, "power_sum_metric: dimension must be at least 3");
  double tau = kInf;
  double q = kInf;
  for (const auto& t : terms) {
    if (t.coefficient == 0.0) continue;
    require(t.exponent > 0.0, "power_sum_metric: exponents must be positive");
    tau = std::min(tau, t.exponent);
    const bool harmonic = std::abs(t.exponent - (dimension - 2)) < 1e-12;
    if (!harmonic) q = std::min(q, t.exponent + 2.0);
  }
  auto profile = RadialProfile::power_sum(boundary_radius, 1.0, std::move(terms));
  return RadialMetric(dimension, boundary_radius, ConformallyFlat{std::move(profile)}, tau, q,
                      std::move(label));
}

RadialMetric warped_metric(int dimension, double boundary_radius, RadialProfile stretch,
                           RadialProfile areal_radius, double decay_order,
                           double scalar_decay_order, std::string label) {
  return RadialMetric(dimension, boundary_radius,
                      WarpedProduct{std::move(stretch), std::move(areal_radius)}, decay_order,
                      scalar_decay_order, std::move(label));
}

RadialMetric schwarzschild_areal(int dimension, double mass, double boundary_radius) {
  require(dimension >= 3, "schwarzschild_areal: dimension must be at least 3");
  const double p = dimension - 2;
  require(1.0 - 2.0 * mass / std::pow(boundary_radius, p) > 0.0,
          "schwarzschild_areal: boundary must lie outside the horizon");
  RadialProfile stretch(
      boundary_radius, 1.0, 0,
      [mass, p](double r) {
        return pow1p_minus_one(-2.0 * mass * radius_power(r, -p), -0.5);
      },
      TailDescriptor{p, mass});
  RadialProfile rho(boundary_radius, 1.0, 1, [](double) { return Jet{}; },
                    TailDescriptor{kInf, 0.0});
  return warped_metric(dimension, boundary_radius, std::move(stretch), std::move(rho), p, kInf,
                       fmt::format("schwarzschild-areal(m={})", mass));
}

double reparametrized_boundary(double boundary_radius, double kappa, double sigma) {
  auto f = [=](double s) {
    return std::make_pair(s + kappa * std::pow(s, 1.0 - sigma) - boundary_radius,
                          1.0 + kappa * (1.0 - sigma) * std::pow(s, -sigma));
  };
  std::uintmax_t iterations = 100;
  return boost::math::tools::newton_raphson_iterate(f, boundary_radius, 0.1 * boundary_radius,
                                                    10.0 * boundary_radius, 50, iterations);
}

RadialMetric reparametrized(const RadialMetric& base, double kappa, double sigma) {
  require(base.conformally_flat(), "reparametrized: base metric must be conformally flat");
  require(sigma > 0.5 * (base.dimension() - 2),
          "reparametrized: sigma must exceed (n-2)/2 to keep asymptotic flatness");
  const double s0 = reparametrized_boundary(base.boundary_radius(), kappa, sigma);
  const double beta = base.conformal_exponent();
  const RadialProfile factor = base.conformal_factor();

  // r(s) - s, with derivatives in s
  auto shift = [kappa, sigma](double s) { return kappa * radius_power(s, 1.0 - sigma); };
  // U^beta - 1 at r(s), with derivatives in s
  auto conformal_part = [factor, shift, beta](double s) {
    const Jet r = Jet::variable(s) + shift(s);
    const Jet da = pow1p_minus_one(factor.deviation(r.value), beta);
    return compose(da.value, da.d1, da.d2, r);
  };

  RadialProfile stretch(
      s0, 1.0, 0,
      [kappa, sigma, conformal_part](double s) {
        // a = U^beta(r(s)) * r'(s), so a - 1 = da + e + da * e with e = r' - 1
        const Jet e = kappa * (1.0 - sigma) * radius_power(s, -sigma);
        const Jet da = conformal_part(s);
        return da + e + da * e;
      },
      TailDescriptor{std::min(base.decay_order(), sigma), 0.0});
  RadialProfile rho(
      s0, 1.0, 1,
      [shift, conformal_part](double s) {
        const Jet r = Jet::variable(s) + shift(s);
        return shift(s) + r * conformal_part(s);
      },
      TailDescriptor{std::min(base.decay_order(), sigma) - 1.0, 0.0});
  return warped_metric(base.dimension(), s0, std::move(stretch), std::move(rho),
                       std::min(base.decay_order(), sigma), base.scalar_decay_order(),
                       fmt::format("{}~reparam(k={},s={})", base.label(), kappa, sigma));
}

// ---- geometry -------------------------------------------------------------

namespace {

struct Frame {
  Jet a, da, rho, drho;
};

Frame frame(const RadialMetric& g, double r) {
  const Jet da = g.stretch_deviation(r);
  const Jet drho = g.areal_radius_deviation(r);
  return {1.0 + da, da, Jet::variable(r) + drho, drho};
}

}  // namespace

double scalar_curvature(const RadialMetric& g, double r) {
  const int n = g.dimension();
  if (g.conformally_flat()) {
    const Jet u = g.conformal_factor()(r);
    const double flat_laplacian = u.d2 + (n - 1) * u.d1 / r;
    return -(4.0 * (n - 1) / (n - 2)) * std::pow(u.value, -double(n + 2) / (n - 2)) *
           flat_laplacian;
  }
  const Frame f = frame(g, r);
  const double a = f.a.value;
  const double rho = f.rho.value;
  const double slope = f.rho.d1 / a;                                // d rho / ds
  const double one_minus_slope = (f.da.value - f.drho.d1) / a;       // 1 - d rho/ds
  const double curvature = (f.rho.d2 * a - f.rho.d1 * f.a.d1) / (a * a * a);  // d2 rho / ds2
  return -2.0 * (n - 1) * curvature / rho +
         (n - 1.0) * (n - 2.0) * one_minus_slope * (1.0 + slope) / (rho * rho);
}

double conformal_potential(const RadialMetric& g, double r) {
  const int n = g.dimension();
  if (g.conformally_flat()) {
    const Jet u = g.conformal_factor()(r);
    return -u.value * (u.d2 + (n - 1) * u.d1 / r);
  }
  const double sigma = 1.0 + g.areal_ratio_deviation(r).value;
  const double kappa = (n - 2.0) / (4.0 * (n - 1));
  return g.stretch(r).value * std::pow(sigma, n - 1) * kappa * scalar_curvature(g, r);
}

Jet inverse_flux_density(const RadialMetric& g, double r) {
  const int n = g.dimension();
  if (g.conformally_flat()) return pow(g.conformal_factor()(r), -2.0);
  return g.stretch(r) * pow(1.0 + g.areal_ratio_deviation(r), 1.0 - n);
}

double mean_curvature_sphere(const RadialMetric& g, double r) {
  const Frame f = frame(g, r);
  return (g.dimension() - 1) * f.rho.d1 / (f.a.value * f.rho.value);
}

double minimal_sphere_radius(const RadialMetric& g, double lo, double hi) {
  require(lo >= g.boundary_radius() && hi > lo,
          fmt::format("minimal_sphere_radius: bracket [{}, {}] must lie in [r0, inf)", lo, hi));
  const auto H = [&](double r) { return mean_curvature_sphere(g, r); };
  if (H(lo) == 0.0) return lo;
  require(std::signbit(H(lo)) != std::signbit(H(hi)),
          fmt::format("minimal_sphere_radius: H does not change sign on [{}, {}]", lo, hi));
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(H, lo, hi, tol, iterations);
  return 0.5 * (a + b);
}

double normal_derivative(const RadialMetric& g, const Jet& fn, double r) {
  return fn.d1 / g.stretch(r).value;
}

double laplacian(const RadialMetric& g, const Jet& fn, double r) {
  const Frame f = frame(g, r);
  const double a = f.a.value;
  const double drift = (g.dimension() - 1) * f.rho.d1 / f.rho.value - f.a.d1 / a;
  return (fn.d2 + drift * fn.d1) / (a * a);
}

double mass_aspect(const RadialMetric& g, double r) {
  const Frame f = frame(g, r);
  const double a = f.a.value;
  const double slope = f.rho.d1 / a;
  const double one_minus_slope = (f.da.value - f.drho.d1) / a;
  return 0.5 * std::pow(f.rho.value, g.dimension() - 2) * one_minus_slope * (1.0 + slope);
}

double flux_mass(const RadialMetric& g, double r) {
  const int n = g.dimension();
  if (g.conformally_flat()) {
    return 2.0 * std::pow(r, n - 2) * g.conformal_factor().deviation(r).value;
  }
  const Jet da = g.stretch_deviation(r);
  const Jet ds = g.areal_ratio_deviation(r);
  const double a_minus_b = (da.value - ds.value) * (2.0 + da.value + ds.value);
  const double b_prime = 2.0 * (1.0 + ds.value) * ds.d1;
  return 0.5 * std::pow(r, n - 1) * (a_minus_b / r - b_prime);
}

BoundaryData boundary_data(const RadialMetric& g,
                           const std::map<std::string, RadialProfile>& functions) {
  const double r0 = g.boundary_radius();
  BoundaryData data{mean_curvature_sphere(g, r0), {}, 1.0 + g.areal_ratio_deviation(r0).value};
  for (const auto& [name, profile] : functions) {
    data.normal_derivatives[name] = normal_derivative(g, profile(r0), r0);
  }
  return data;
}

MassEstimate estimate_adm_mass(const RadialMetric& g, const MassOptions& options) {
  const double r0 = g.boundary_radius();
  std::vector<double> sequence(options.levels);
  for (int k = 0; k < options.levels; ++k) {
    sequence[k] = flux_mass(g, std::ldexp(r0, k));
    if (!std::isfinite(sequence[k])) {
      sequence.resize(k);
      break;
    }
  }
  if (sequence.size() < 4) {
    return {std::numeric_limits<double>::quiet_NaN(), kInf,
            std::numeric_limits<double>::quiet_NaN(), false};
  }
  const Extrapolation e = extrapolate_dyadic(sequence);
  const double scale = std::max(std::abs(e.value), std::pow(r0, g.dimension() - 2));
  return {e.value, e.error_estimate, e.fitted_order,
          e.error_estimate <= options.relative_tolerance * scale};
}

double adm_mass(const RadialMetric& g, const MassOptions& options) {
  const MassEstimate m = estimate_adm_mass(g, options);
  if (!m.converged) {
    throw ExtrapolationError(fmt::format(
        "adm_mass: extrapolation did not converge for {} (estimate {}, error {}, order {}); "
        "the metric may decay too slowly",
        g.label(), m.value, m.error_estimate, m.fitted_order));
  }
  return m.value;
}

double fitted_decay_order(const RadialMetric& g) {
  const double r0 = g.boundary_radius();
  std::vector<RadialSample> samples;
  bool any_zero = false;
  for (double r : sample_radii(r0 * 1e2, 13, 1e4)) {
    const double dev = std::max(std::abs(g.stretch_deviation(r).value),
                                std::abs(g.areal_ratio_deviation(r).value));
    if (dev == 0.0) any_zero = true;
    samples.push_back({r, dev});
  }
  if (any_zero) {
    const bool all_zero = std::all_of(samples.begin(), samples.end(),
                                      [](const RadialSample& s) { return s.value == 0.0; });
    if (all_zero) return kInf;
    throw FitError("fitted_decay_order: deviation vanishes at some sample radii");
  }
  return decay_order_fit(samples).exponent;
}

}  // namespace massbound
