#pragma once

#include <vector>

#include "mcltsgd/linalg.hpp"
#include "mcltsgd/quadrature.hpp"
#include "mcltsgd/test_functions.hpp"

namespace mcltsgd::stein {

using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::Vector;

// Quadrature controls for the semigroup time integral and the inner
// Gaussian expectation. The time axis [0, horizon] is split into
// geometrically shrinking panels toward 0 where the integrand kinks.
struct SteinOptions {
  double horizon = 16.0;
  int panels = 24;
  int gl_order = 16;
  int gh_points = 64;
  double residual_tol = 1e-6;
  int max_refinements = 3;
};

// Numerical solution f of
//   <Sigma, Hess f(x)> - <x - mu, grad f(x)> = h(x) - E h(Sigma^{1/2} Z + mu)
// built from the interpolation-to-Gaussian semigroup representation.
class SteinSolution {
 public:
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;
  // Left side minus right side of the equation at x; ~0 when converged.
  double residual(const Vector& x) const;

  double reference_expectation() const { return eh_ref_; }
  // Max |residual| over the probe grid used during construction.
  double achieved_residual() const { return achieved_residual_; }
  const SteinOptions& options() const { return opts_; }

 private:
  friend SteinSolution stein_solve(const testfn::TestFunction& h,
                                   const Vector& mu, const SpdMatrix& sigma,
                                   const SteinOptions& opts);
  SteinSolution() = default;
  void build_tables();

  testfn::TestFunction h_ = testfn::TestFunction::softplus_radial(Vector::Zero(1));
  Vector mu_;
  Matrix sigma_half_;
  SteinOptions opts_;
  double eh_ref_ = 0.0;
  double achieved_residual_ = 0.0;
  // time nodes with cached decay factors, and mapped Gaussian nodes
  Vector s_nodes_, s_weights_, decay_, decay2_, spread_;
  Matrix z_mapped_;  // gh node rows premultiplied by Sigma^{1/2}
  Vector z_weights_;
};

// Solves the equation for dim <= 2, refining the quadrature until the
// residual tolerance holds on the probe grid (throws QuadratureNotConverged
// if refinement runs out).
SteinSolution stein_solve(const testfn::TestFunction& h, const Vector& mu,
                          const SpdMatrix& sigma,
                          const SteinOptions& opts = SteinOptions{});

// Axis-aligned probe lattice over [lo, hi]^dim with the given step.
std::vector<Vector> make_probe_grid(int dim, double lo, double hi, double step);

// Lower bound for the Lipschitz constant of Hess f: max pairwise quotient
// ||Hess f(x) - Hess f(y)|| / ||x - y|| over probes, with Hessians taken
// from central finite differences of the gradient (step fd_step).
double stein_factor_estimate(const SteinSolution& solution,
                             const std::vector<Vector>& probes,
                             double fd_step = 1e-3);

}  // namespace mcltsgd::stein
