#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace massbound::chebyshev {

/// Chebyshev-Lobatto points mapped to [0, 1], ordered from 1 down to 0.
std::vector<double> unit_interval_nodes(int degree);

/// Differentiation matrix on the nodes returned by unit_interval_nodes.
Eigen::MatrixXd differentiation_matrix(std::span<const double> nodes);

/// Same matrix built from trigonometric node differences, which keeps full
/// relative accuracy next to the endpoints.
Eigen::MatrixXd differentiation_matrix(int degree);
/// Second-derivative matrix on the same nodes (not the square of the first).
Eigen::MatrixXd second_differentiation_matrix(int degree);

/// Barycentric weights for Chebyshev-Lobatto points.
std::vector<double> barycentric_weights(int degree);

/// Barycentric evaluation of the interpolant through (nodes, values) at x.
double interpolate(std::span<const double> nodes, std::span<const double> weights,
                   std::span<const double> values, double x);

}  // namespace massbound::chebyshev
