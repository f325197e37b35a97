#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "massbound/jet.hpp"

namespace massbound {

/// Leading behaviour of the decaying part: deviation(r) ~ coefficient * r^{-exponent}.
struct TailDescriptor {
  double exponent = 0.0;
  double coefficient = 0.0;
};

/// One term coefficient * r^{-exponent} of a power sum.
struct PowerTerm {
  double coefficient = 0.0;
  double exponent = 0.0;
};

/// A scalar function of the radius on [r0, inf) with two derivatives.
///
/// Every profile is stored as baseline + deviation, where the baseline is
/// coefficient * r^power (power 0 for conformal factors and Green's
/// functions, power 1 for areal radii) and the deviation decays. Keeping the
/// deviation separate lets mass and capacity extraction work at radii where
/// forming f - f_inf by subtraction would lose every significant digit.
///
/// Profiles are immutable and cheap to copy; the evaluator is shared.
class RadialProfile {
 public:
  using Evaluator = std::function<Jet(double)>;

  RadialProfile(double domain_start, double baseline_coefficient, int baseline_power,
                Evaluator deviation, TailDescriptor tail);

  static RadialProfile constant(double domain_start, double value);
  static RadialProfile power_sum(double domain_start, double constant,
                                 std::vector<PowerTerm> terms);

  /// Full value f(r) with derivatives.
  Jet operator()(double r) const;
  /// f(r) - baseline(r) with derivatives.
  Jet deviation(double r) const { return (*deviation_)(r); }
  Jet baseline(double r) const;

  double domain_start() const { return domain_start_; }
  double baseline_coefficient() const { return baseline_coefficient_; }
  int baseline_power() const { return baseline_power_; }
  /// Limit of f at infinity when the baseline is constant.
  double asymptote() const { return baseline_power_ == 0 ? baseline_coefficient_ : 0.0; }
  const TailDescriptor& tail() const { return tail_; }

  /// Power-sum terms when the profile is an explicit power sum, empty otherwise.
  std::span<const PowerTerm> power_terms() const { return terms_; }
  bool is_power_sum() const { return power_sum_; }

 private:
  double domain_start_;
  double baseline_coefficient_;
  int baseline_power_;
  std::shared_ptr<const Evaluator> deviation_;
  TailDescriptor tail_;
  std::vector<PowerTerm> terms_;
  bool power_sum_ = false;
};

/// Polynomial interpolant in xi = sqrt(t), t = (r0/r)^{n-2}, xi in [0, 1],
/// stored as values at Chebyshev points with the first two xi-derivatives.
class CompactifiedInterpolant {
 public:
  CompactifiedInterpolant(int dimension, double domain_start, std::vector<double> nodes,
                          std::vector<double> values, std::vector<double> first,
                          std::vector<double> second);

  struct XiJet {
    double value, d1, d2;
  };
  XiJet at_xi(double xi) const;
  double xi_of(double r) const;
  /// The interpolated function expressed as a jet in r.
  Jet at_radius(double r) const;

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> values() const { return values_; }
  int dimension() const { return dimension_; }
  double domain_start() const { return domain_start_; }

 private:
  int dimension_;
  double domain_start_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> values_;
  std::vector<double> first_;
  std::vector<double> second_;
};

/// Centered finite-difference derivatives, used by invariant checks.
struct FiniteDifference {
  double first;
  double second;
};
FiniteDifference centered_difference(const RadialProfile& f, double r, double h);

}  // namespace massbound
