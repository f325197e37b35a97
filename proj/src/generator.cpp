#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "massbound/errors.hpp"
#include "massbound/metric.hpp"

namespace massbound {

namespace {

// mt19937_64's output sequence is fixed by the standard; the conversion to
// double is done by hand because std::uniform_real_distribution is not.
class UnitStream {
 public:
  explicit UnitStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double in(std::pair<double, double> range) {
    return range.first + (range.second - range.first) * next();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

GeneratorParams default_generator(int dimension, double boundary_radius) {
  GeneratorParams p;
  p.dimension = dimension;
  p.boundary_radius = boundary_radius;
  p.num_terms = 2;
  p.exponent_range = {dimension - 1.5, dimension + 1.0};
  p.coeff_range = {0.0, 0.5};
  const double scale = std::pow(boundary_radius, dimension - 2);
  p.mass_range = {-0.5 * scale, 2.0 * scale};
  p.boundary_floor = 0.2;
  return p;
}

RadialMetric random_nonneg_scalar_metric(std::uint64_t seed, const GeneratorParams& params) {
  const int n = params.dimension;
  const double r0 = params.boundary_radius;
  if (params.exponent_range.first < n - 2 - 1e-12 ||
      params.exponent_range.second < params.exponent_range.first) {
    throw DomainError("random_nonneg_scalar_metric: exponent range must lie in [n-2, inf)");
  }
  if (params.coeff_range.first < 0.0 || params.coeff_range.second < params.coeff_range.first) {
    throw DomainError("random_nonneg_scalar_metric: coefficient range must lie in [0, inf)");
  }
  if (!(params.boundary_floor > 0.0 && params.boundary_floor < 0.5)) {
    throw DomainError("random_nonneg_scalar_metric: boundary floor must lie in (0, 1/2)");
  }

  UnitStream stream(seed);
  const double harmonic = n - 2;
  const double r0_harmonic = std::pow(r0, harmonic);

  // the mass term must leave room for the floor on its own
  double mass = stream.in(params.mass_range);
  mass = std::max(mass, -2.0 * r0_harmonic * (1.0 - 2.0 * params.boundary_floor));

  std::vector<PowerTerm> terms;
  double positive = 1.0 + 0.5 * mass / r0_harmonic;
  double negative = 0.0;
  for (int k = 0; k < params.num_terms; ++k) {
    const double p = stream.in(params.exponent_range);
    const double c = stream.in(params.coeff_range);
    const bool is_harmonic = std::abs(p - harmonic) < 1e-12;
    terms.push_back({is_harmonic ? c : -c, p});
    (is_harmonic ? positive : negative) += c * std::pow(r0, -p);
  }
  if (mass != 0.0) terms.push_back({0.5 * mass, harmonic});

  // U is superharmonic, so inf U = min(U(r0), 1); shrink the negative part
  // until U(r0) clears the floor.
  if (positive - negative < params.boundary_floor) {
    const double lambda = (positive - params.boundary_floor) / negative;
    for (auto& t : terms) {
      if (t.coefficient < 0.0) t.coefficient *= lambda;
    }
  }
  return power_sum_metric(n, r0, std::move(terms), fmt::format("generated:{}", seed));
}

}  // namespace massbound
