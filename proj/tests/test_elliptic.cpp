#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "massbound/elliptic.hpp"
#include "massbound/errors.hpp"
#include "massbound/metric.hpp"
#include "oracles.hpp"

using namespace massbound;

namespace {

double sup_error(const RadialProfile& f, const std::function<double(double)>& exact, double r0) {
  double err = 0.0;
  for (double r : sample_radii(r0, 200, 1e6)) {
    err = std::max(err, std::abs(f(r).value - exact(r)));
  }
  return err;
}

}  // namespace

TEST_CASE("conformal Green's function of schwarzschild matches the closed form") {
  for (int n : {3, 4, 5}) {
    for (double m : {-0.5, 0.0, 1.0, 2.0}) {
      for (double r0 : {1.0, 2.0}) {
        const auto g = schwarzschild(n, m, r0);
        const auto u = solve_conformal_green(g);
        const double err = sup_error(
            u.function, [&](double r) { return oracle::schwarzschild_green(n, m, r0, r); }, r0);
        CHECK(err <= 1e-8);
        CHECK(u.boundary_value == 1.0);
        CHECK(std::abs(u.function(r0).value - 1.0) <= 1e-12);
        CHECK(u.residual_norm <= 1e-6);
        CHECK(u.expansion_constant ==
              doctest::Approx(0.5 * (2.0 * std::pow(r0, n - 2) + m)).epsilon(1e-10));
        CHECK(-(n - 1.0) / (n - 2) * u.normal_derivative_at_boundary ==
              doctest::Approx(oracle::schwarzschild_green_bound(n, m, r0)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("conformal Green's function of conformally flat metrics") {
  for (int n : {3, 4, 5}) {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      const auto g = random_nonneg_scalar_metric(seed, default_generator(n));
      const auto& U = g.conformal_factor();
      const auto u = solve_conformal_green(g);
      const double err = sup_error(
          u.function,
          [&](double r) {
            return oracle::conformally_flat_green(
                n, [&](double s) { return U(s).value; }, g.boundary_radius(), r);
          },
          g.boundary_radius());
      CHECK_MESSAGE(err <= 1e-8, "n=", n, " seed=", seed, " err=", err);
    }
  }
}

TEST_CASE("harmonic Green's function") {
  for (int n : {3, 4, 5}) {
    const double r0 = 2.0;
    const auto v = solve_harmonic_green(flat_metric(n, r0));
    CHECK(v.expansion_constant == doctest::Approx(std::pow(r0, n - 2)).epsilon(1e-13));
    CHECK(sup_error(v.function, [&](double r) { return std::pow(r0 / r, n - 2); }, r0) <= 1e-13);

    for (double m : {-0.5, 1.0, 2.0}) {
      const auto g = schwarzschild(n, m, 1.0);
      const auto vs = solve_harmonic_green(g);
      CHECK(sup_error(vs.function,
                      [&](double r) { return oracle::schwarzschild_harmonic(n, m, 1.0, r); },
                      1.0) <= 1e-12);
      // strictly decreasing
      double prev = 2.0;
      for (double r : sample_radii(1.0, 50, 1e4)) {
        const double value = vs.function(r).value;
        CHECK(value < prev);
        CHECK(vs.function(r).d1 < 0.0);
        prev = value;
      }
    }
  }
}

TEST_CASE("harmonic and conformal Green's functions coincide when R = 0") {
  const auto g = flat_metric(3, 1.0);
  const auto u = solve_conformal_green(g);
  const auto v = solve_harmonic_green(g);
  for (double r : sample_radii(1.0, 30, 1e3)) {
    CHECK(u.function(r).value == doctest::Approx(1.0 / r).epsilon(1e-13));
    CHECK(v.function(r).value == doctest::Approx(1.0 / r).epsilon(1e-13));
  }
  CHECK(u.normal_derivative_at_boundary == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(normal_derivative_at_boundary(v, g) == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("warped-product metrics go through the same solvers") {
  const auto cf = power_sum_metric(4, 1.0, {{0.4, 2.0}, {-0.2, 3.0}});
  const auto wp = reparametrized(cf, -0.2, 3.0);
  const auto u_cf = solve_conformal_green(cf);
  const auto u_wp = solve_conformal_green(wp);
  const auto v_cf = solve_harmonic_green(cf);
  const auto v_wp = solve_harmonic_green(wp);
  CHECK(u_wp.expansion_constant == doctest::Approx(u_cf.expansion_constant).epsilon(1e-8));
  CHECK(v_wp.expansion_constant == doctest::Approx(v_cf.expansion_constant).epsilon(1e-10));
  for (double s : {wp.boundary_radius(), 1.5, 4.0, 30.0}) {
    const double r = s - 0.2 * std::pow(s, -2.0);
    CHECK(u_wp.function(s).value == doctest::Approx(u_cf.function(r).value).epsilon(1e-8));
    CHECK(v_wp.function(s).value == doctest::Approx(v_cf.function(r).value).epsilon(1e-10));
  }
  // the normal derivative is geometric, so it is gauge independent too
  CHECK(u_wp.normal_derivative_at_boundary ==
        doctest::Approx(u_cf.normal_derivative_at_boundary).epsilon(1e-8));
}

TEST_CASE("maximum principle and comparison on generated metrics") {
  for (int n : {3, 4, 5}) {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
      const auto g = random_nonneg_scalar_metric(seed, default_generator(n));
      const auto u = solve_conformal_green(g);
      const auto v = solve_harmonic_green(g);
      double prev_u = 2.0, prev_v = 2.0;
      for (double r : sample_radii(g.boundary_radius(), 60, 1e5)) {
        const double uu = u.function(r).value;
        const double vv = v.function(r).value;
        CHECK(uu > 0.0);
        CHECK(uu <= 1.0 + 1e-12);
        CHECK(vv > 0.0);
        CHECK(vv <= 1.0);
        CHECK(uu <= vv + 1e-10);
        CHECK(uu < prev_u);
        CHECK(vv < prev_v);
        prev_u = uu;
        prev_v = vv;
      }
      CHECK(u.normal_derivative_at_boundary <= v.normal_derivative_at_boundary + 1e-10);
      CHECK(u.normal_derivative_at_boundary < 0.0);
    }
  }
}

TEST_CASE("phi with prescribed boundary value") {
  const auto flat = flat_metric(3, 1.0);
  const auto one = solve_harmonic_with_boundary(flat, 1.0);
  CHECK(one.function(5.0).value == 1.0);
  CHECK(one.expansion_constant == 0.0);

  const auto half = solve_harmonic_with_boundary(flat, -0.5);
  CHECK(half.expansion_constant == doctest::Approx(1.5).epsilon(1e-13));
  for (double r : {1.0, 2.0, 10.0}) {
    CHECK(half.function(r).value == doctest::Approx(1.0 - 1.5 / r).epsilon(1e-13));
  }
  CHECK(half.boundary_value == -0.5);

  const auto g = schwarzschild(4, 1.0, 1.0);
  const auto v = solve_harmonic_green(g);
  const auto bray = solve_harmonic_with_boundary(g, 0.0);
  CHECK(bray.expansion_constant == doctest::Approx(v.expansion_constant).epsilon(1e-14));

  // linearity in (c - 1)
  for (double c : {-0.9, -0.3, 0.4, 2.5}) {
    const auto phi = harmonic_with_boundary(v, c);
    for (double r : {1.0, 1.7, 12.0}) {
      CHECK(std::abs((phi.function(r).value - 1.0) - (c - 1.0) * v.function(r).value) <= 1e-12);
    }
    CHECK(phi.function(1.0).value == doctest::Approx(c).epsilon(1e-12));
  }
  CHECK_THROWS_AS(solve_harmonic_with_boundary(g, -1.0), DomainError);
  CHECK_THROWS_AS(harmonic_with_boundary(v, -2.0), DomainError);
}

TEST_CASE("expansion constant fits") {
  const auto flat_v = solve_harmonic_green(flat_metric(3, 2.0));
  const auto fv = expansion_constant(flat_v, flat_metric(3, 2.0));
  CHECK(fv.constant == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::isinf(fv.subleading_order));
  CHECK(!fv.decay_warning);

  const auto g = schwarzschild(3, 2.0, 1.0);
  const auto fu = expansion_constant(solve_conformal_green(g), g);
  CHECK(fu.constant == doctest::Approx(2.0).epsilon(1e-10));
  // u r = 2 - 2/r + ..., so the correction is r^{-2}
  CHECK(fu.subleading_order == doctest::Approx(2.0).epsilon(1e-2));

  const auto two = power_sum_metric(3, 1.0, {{0.5, 1.0}, {-0.3, 2.4}});
  const auto ft = expansion_constant(solve_conformal_green(two), two);
  CHECK(ft.subleading_order > 1.0);
  CHECK(!ft.decay_warning);
}

TEST_CASE("mesh convergence of the collocation constant") {
  const auto g = power_sum_metric(3, 1.0, {{0.5, 1.0}, {-0.3, 2.5}});
  std::vector<double> constants;
  for (int degree : {16, 32, 64, 128}) {
    SolverOptions o;
    o.collocation_degree = degree;
    constants.push_back(solve_conformal_green(g, o).expansion_constant);
  }
  const double exact = oracle::conformally_flat_green(
                           3, [&](double r) { return g.conformal_factor()(r).value; }, 1.0, 1e12) *
                       1e12;
  const double e16 = std::abs(constants[0] - exact);
  const double e64 = std::abs(constants[2] - exact);
  const double e128 = std::abs(constants[3] - exact);
  CHECK(e64 < e16);
  CHECK(e128 <= 1e-9);
}
