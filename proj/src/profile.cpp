#include "massbound/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "massbound/chebyshev.hpp"

namespace massbound {

RadialProfile::RadialProfile(double domain_start, double baseline_coefficient,
                             int baseline_power, Evaluator deviation, TailDescriptor tail)
    : domain_start_(domain_start),
      baseline_coefficient_(baseline_coefficient),
      baseline_power_(baseline_power),
      deviation_(std::make_shared<const Evaluator>(std::move(deviation))),
      tail_(tail) {
  if (!(domain_start > 0.0)) {
    throw std::invalid_argument("RadialProfile: domain start must be positive");
  }
}

RadialProfile RadialProfile::constant(double domain_start, double value) {
  auto profile = RadialProfile(
      domain_start, value, 0, [](double) { return Jet{}; },
      TailDescriptor{std::numeric_limits<double>::infinity(), 0.0});
  profile.power_sum_ = true;
  return profile;
}

RadialProfile RadialProfile::power_sum(double domain_start, double constant,
                                       std::vector<PowerTerm> terms) {
  std::erase_if(terms, [](const PowerTerm& t) { return t.coefficient == 0.0; });
  std::sort(terms.begin(), terms.end(),
            [](const PowerTerm& a, const PowerTerm& b) { return a.exponent < b.exponent; });

  TailDescriptor tail{std::numeric_limits<double>::infinity(), 0.0};
  if (!terms.empty()) {
    tail.exponent = terms.front().exponent;
    for (const auto& t : terms) {
      if (t.exponent == tail.exponent) tail.coefficient += t.coefficient;
    }
  }
  auto shared_terms = terms;
  auto profile = RadialProfile(
      domain_start, constant, 0,
      [shared_terms](double r) {
        Jet sum{};
        for (const auto& t : shared_terms) {
          sum = sum + t.coefficient * radius_power(r, -t.exponent);
        }
        return sum;
      },
      tail);
  profile.terms_ = std::move(terms);
  profile.power_sum_ = true;
  return profile;
}

Jet RadialProfile::baseline(double r) const {
  switch (baseline_power_) {
    case 0:
      return Jet::constant(baseline_coefficient_);
    case 1:
      return {baseline_coefficient_ * r, baseline_coefficient_, 0.0};
    default:
      return baseline_coefficient_ * radius_power(r, baseline_power_);
  }
}

Jet RadialProfile::operator()(double r) const { return baseline(r) + deviation(r); }

CompactifiedInterpolant::CompactifiedInterpolant(int dimension, double domain_start,
                                                 std::vector<double> nodes,
                                                 std::vector<double> values,
                                                 std::vector<double> first,
                                                 std::vector<double> second)
    : dimension_(dimension),
      domain_start_(domain_start),
      nodes_(std::move(nodes)),
      weights_(chebyshev::barycentric_weights(static_cast<int>(nodes_.size()) - 1)),
      values_(std::move(values)),
      first_(std::move(first)),
      second_(std::move(second)) {}

CompactifiedInterpolant::XiJet CompactifiedInterpolant::at_xi(double xi) const {
  return {chebyshev::interpolate(nodes_, weights_, values_, xi),
          chebyshev::interpolate(nodes_, weights_, first_, xi),
          chebyshev::interpolate(nodes_, weights_, second_, xi)};
}

double CompactifiedInterpolant::xi_of(double r) const {
  return std::pow(domain_start_ / r, 0.5 * (dimension_ - 2));
}

Jet CompactifiedInterpolant::at_radius(double r) const {
  const double half = 0.5 * (dimension_ - 2);
  const double xi = xi_of(r);
  const Jet xi_jet{xi, -half * xi / r, half * (half + 1.0) * xi / (r * r)};
  const auto f = at_xi(xi);
  return compose(f.value, f.d1, f.d2, xi_jet);
}

FiniteDifference centered_difference(const RadialProfile& f, double r, double h) {
  const double fm = f(r - h).value;
  const double f0 = f(r).value;
  const double fp = f(r + h).value;
  return {(fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
}

}  // namespace massbound
