#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mcltsgd/linalg.hpp"
#include "mcltsgd/stein.hpp"
#include "mcltsgd/test_functions.hpp"

using namespace mcltsgd;
using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::Vector;

TEST_SUITE("stein") {

TEST_CASE("probe grid covers the requested lattice") {
  const auto g1 = stein::make_probe_grid(1, -3.0, 3.0, 0.5);
  CHECK(g1.size() == 13);
  CHECK(g1.front()(0) == doctest::Approx(-3.0));
  CHECK(g1.back()(0) == doctest::Approx(3.0));

  const auto g2 = stein::make_probe_grid(2, -1.0, 1.0, 1.0);
  CHECK(g2.size() == 9);
}

TEST_CASE("solver closes the defining equation for a one-dim cosine") {
  Vector a(1);
  a << 1.0;
  const auto h = testfn::TestFunction::cosine(a);
  const Vector mu = Vector::Zero(1);
  const SpdMatrix sigma = SpdMatrix::identity(1);
  const auto sol = stein::stein_solve(h, mu, sigma);

  CHECK(sol.reference_expectation() ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  CHECK(sol.achieved_residual() <= sol.options().residual_tol);

  // <Sigma, Hess f> - <x - mu, grad f> = h - E h pointwise on fresh probes
  // (including points outside the construction grid).
  for (double x : {-3.7, -1.05, 0.0, 0.4, 2.3}) {
    Vector p(1);
    p << x;
    CHECK(std::abs(sol.residual(p)) < 1e-5);
    const double lhs = sigma.matrix()(0, 0) * sol.hessian(p)(0, 0) -
                       (x - mu(0)) * sol.gradient(p)(0);
    const double rhs = h.value(p) - sol.reference_expectation();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
  }

  // Internal derivative tables agree with finite differences of value().
  Vector x0(1);
  x0 << 0.7;
  const double step = 1e-5;
  Vector hi = x0, lo = x0;
  hi(0) += step;
  lo(0) -= step;
  const double fd_grad = (sol.value(hi) - sol.value(lo)) / (2.0 * step);
  CHECK(sol.gradient(x0)(0) == doctest::Approx(fd_grad).epsilon(1e-6));
  const double fd_hess =
      (sol.gradient(hi)(0) - sol.gradient(lo)(0)) / (2.0 * step);
  CHECK(sol.hessian(x0)(0, 0) == doctest::Approx(fd_hess).epsilon(1e-5));
}

TEST_CASE("second-derivative smoothness factor stays in the expected band") {
  Vector a(1);
  a << 1.0;
  const auto h = testfn::TestFunction::cosine(a);
  const auto sol =
      stein::stein_solve(h, Vector::Zero(1), SpdMatrix::identity(1));
  const auto probes = stein::make_probe_grid(1, -3.0, 3.0, 0.5);
  const double factor = stein::stein_factor_estimate(sol, probes);
  // The solution's Hessian Lipschitz constant is bounded by
  // (pi/4) sqrt(d) m2 / sqrt(lambda_min(Sigma)); the probe estimate is a
  // lower bound for it, and should not be degenerate either.
  const double cap = (std::numbers::pi / 4.0) * 1.0 * 1.0;
  CHECK(factor <= cap * 1.01);
  CHECK(factor >= 0.2);
}

TEST_CASE("wider target covariances damp the solution accordingly") {
  Vector a(1);
  a << 1.0;
  const auto h = testfn::TestFunction::cosine(a);
  const SpdMatrix sigma4{4.0 * Matrix::Identity(1, 1)};
  const auto sol = stein::stein_solve(h, Vector::Zero(1), sigma4);
  CHECK(sol.reference_expectation() ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-8));
  const auto probes = stein::make_probe_grid(1, -3.0, 3.0, 0.5);
  const double factor = stein::stein_factor_estimate(sol, probes);
  const double cap = (std::numbers::pi / 4.0) * 1.0 * 1.0 / 2.0;
  CHECK(factor <= cap * 1.01);
}

}  // TEST_SUITE
