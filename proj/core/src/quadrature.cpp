#include "mcltsgd/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "mcltsgd/errors.hpp"

namespace mcltsgd::quadrature {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
Rule golub_welsch(const Vector& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    jacobi(k, k + 1) = offdiag(k);
    jacobi(k + 1, k) = offdiag(k);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  Rule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights(i) = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

Rule gauss_hermite(int n) {
  if (n < 1) throw ConfigError("gauss_hermite: n must be positive");
  Vector off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  return golub_welsch(off, 1.0);  // weight already normalized to E[.]
}

Rule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: n must be positive");
  Vector off(n - 1);
  for (int k = 1; k < n; ++k) {
    off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  }
  return golub_welsch(off, 2.0);
}

TensorRule tensor_gauss_hermite(int points_per_axis, int dim) {
  if (dim < 1 || dim > 3) {
    throw DimTooLargeForQuadrature(
        "tensor_gauss_hermite: dim must be 1, 2 or 3");
  }
  const Rule axis = gauss_hermite(points_per_axis);
  const int n = points_per_axis;
  long total = 1;
  for (int k = 0; k < dim; ++k) total *= n;

  TensorRule rule;
  rule.nodes.resize(total, dim);
  rule.weights.resize(total);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    double w = 1.0;
    for (int k = 0; k < dim; ++k) {
      const int j = static_cast<int>(rem % n);
      rem /= n;
      rule.nodes(idx, k) = axis.nodes(j);
      w *= axis.weights(j);
    }
    rule.weights(idx) = w;
  }
  return rule;
}

}  // namespace mcltsgd::quadrature
