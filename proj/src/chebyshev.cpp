#include "massbound/chebyshev.hpp"

#include <cmath>
#include <numbers>

namespace massbound::chebyshev {

std::vector<double> unit_interval_nodes(int degree) {
  std::vector<double> nodes(degree + 1);
  for (int j = 0; j <= degree; ++j) {
    // cos^2(theta/2) rather than (1 + cos theta)/2: no cancellation near 0
    const double c = std::cos(0.5 * std::numbers::pi * j / degree);
    nodes[j] = c * c;
  }
  nodes[0] = 1.0;
  nodes[degree] = 0.0;
  return nodes;
}

std::vector<double> barycentric_weights(int degree) {
  std::vector<double> w(degree + 1);
  for (int j = 0; j <= degree; ++j) {
    w[j] = (j % 2 == 0) ? 1.0 : -1.0;
  }
  w[0] *= 0.5;
  w[degree] *= 0.5;
  return w;
}

Eigen::MatrixXd differentiation_matrix(std::span<const double> nodes) {
  const int n = static_cast<int>(nodes.size());
  const auto w = barycentric_weights(n - 1);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (w[j] / w[i]) / (nodes[i] - nodes[j]);
      row_sum += d(i, j);
    }
    // negative-sum trick keeps rows exact on constants
    d(i, i) = -row_sum;
  }
  return d;
}

Eigen::MatrixXd differentiation_matrix(int degree) {
  const int n = degree + 1;
  const auto w = barycentric_weights(degree);
  const double step = 0.5 * std::numbers::pi / degree;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      // cos^2 a - cos^2 b = sin(b + a) sin(b - a), exact to working precision
      const double diff = std::sin((i + j) * step) * std::sin((j - i) * step);
      d(i, j) = (w[j] / w[i]) / diff;
      row_sum += d(i, j);
    }
    d(i, i) = -row_sum;
  }
  return d;
}

Eigen::MatrixXd second_differentiation_matrix(int degree) {
  const int n = degree + 1;
  const Eigen::MatrixXd d = differentiation_matrix(degree);
  const double step = 0.5 * std::numbers::pi / degree;
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double diff = std::sin((i + j) * step) * std::sin((j - i) * step);
      d2(i, j) = 2.0 * d(i, j) * (d(i, i) - 1.0 / diff);
      row_sum += d2(i, j);
    }
    d2(i, i) = -row_sum;
  }
  return d2;
}

double interpolate(std::span<const double> nodes, std::span<const double> weights,
                   std::span<const double> values, double x) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double dx = x - nodes[j];
    if (dx == 0.0) return values[j];
    const double c = weights[j] / dx;
    num += c * values[j];
    den += c;
  }
  return num / den;
}

}  // namespace massbound::chebyshev
