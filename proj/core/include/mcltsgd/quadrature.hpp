#pragma once

#include "mcltsgd/linalg.hpp"

namespace mcltsgd::quadrature {

using linalg::Matrix;
using linalg::Vector;

struct Rule {
  Vector nodes;
  Vector weights;
};

// Nodes/weights so that sum_i w_i g(x_i) ~ E[g(Z)], Z standard normal.
// Weights sum to 1.
Rule gauss_hermite(int n);

// Nodes/weights for the integral of g over [-1, 1].
Rule gauss_legendre(int n);

// Tensor-product Gaussian expectation rule for dim in {1, 2, 3}:
// sum_i w_i g(row_i) ~ E[g(Z)], Z standard normal in R^dim.
struct TensorRule {
  Matrix nodes;  // one point per row
  Vector weights;
};
TensorRule tensor_gauss_hermite(int points_per_axis, int dim);

}  // namespace mcltsgd::quadrature
