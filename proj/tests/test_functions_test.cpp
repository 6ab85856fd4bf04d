#include <doctest.h>

#include <cmath>

#include "mcltsgd/errors.hpp"
#include "mcltsgd/test_functions.hpp"

using namespace mcltsgd;
using linalg::Matrix;
using linalg::Vector;
using testfn::TestFunction;

namespace {

// Central finite differences for gradient/hessian consistency checks.
Vector fd_gradient(const TestFunction& h, const Vector& x, double step) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi(i) += step;
    lo(i) -= step;
    g(i) = (h.value(hi) - h.value(lo)) / (2.0 * step);
  }
  return g;
}

Matrix fd_hessian(const TestFunction& h, const Vector& x, double step) {
  Matrix m(x.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi(i) += step;
    lo(i) -= step;
    m.col(i) = (h.gradient(hi) - h.gradient(lo)) / (2.0 * step);
  }
  return m;
}

}  // namespace

TEST_SUITE("test_functions") {

TEST_CASE("quadratic family: value, derivatives, constants") {
  Matrix q(2, 2);
  q << 2.0, 1.0, 1.0, 4.0;
  const TestFunction h = TestFunction::quadratic(q);
  Vector x(2);
  x << 1.0, -1.0;
  CHECK(h.value(x) == doctest::Approx(0.5 * x.dot(q * x)).epsilon(1e-15));
  CHECK((h.gradient(x) - q * x).norm() < 1e-14);
  CHECK(linalg::frobenius_norm(h.hessian(x) - q) == 0.0);
  CHECK_FALSE(h.m1().has_value());
  CHECK(h.m2() == doctest::Approx(linalg::operator_norm(q)).epsilon(1e-14));
  CHECK(h.family() == testfn::Family::kQuadratic);
  CHECK(h.quadratic_form() == q);
}

TEST_CASE("cosine family: closed-form derivatives and naming") {
  Vector a(2);
  a << 0.6, 0.8;
  const TestFunction h = TestFunction::cosine(a);
  CHECK(h.name() == "cosine(0.6;0.8)");
  CHECK(h.m1().value() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h.m2() == doctest::Approx(1.0).epsilon(1e-15));

  Vector x(2);
  x << 0.3, -1.2;
  const double ax = a.dot(x);
  CHECK(h.value(x) == doctest::Approx(std::cos(ax)).epsilon(1e-15));
  CHECK((h.gradient(x) - (-std::sin(ax)) * a).norm() < 1e-14);
  const Matrix want = -std::cos(ax) * (a * a.transpose());
  CHECK(linalg::frobenius_norm(h.hessian(x) - want) < 1e-14);

  CHECK((h.gradient(x) - fd_gradient(h, x, 1e-6)).norm() < 1e-9);
  CHECK(linalg::frobenius_norm(h.hessian(x) - fd_hessian(h, x, 1e-6)) < 1e-9);
}

TEST_CASE("cosine rejects the zero direction") {
  CHECK_THROWS_AS(TestFunction::cosine(Vector::Zero(2)), ConfigError);
}

TEST_CASE("softplus_radial family: values and finite differences") {
  Vector a(2);
  a << 1.0, 2.0;
  const TestFunction h = TestFunction::softplus_radial(a);
  Vector x(2);
  x << 0.5, -0.25;
  const double ax = a.dot(x);
  CHECK(h.value(x) == doctest::Approx(std::sqrt(1.0 + ax * ax)).epsilon(1e-15));
  CHECK(h.m1().value() == doctest::Approx(a.norm()).epsilon(1e-15));
  CHECK(h.m2() == doctest::Approx(a.squaredNorm()).epsilon(1e-15));
  CHECK((h.gradient(x) - fd_gradient(h, x, 1e-6)).norm() < 1e-9);
  CHECK(linalg::frobenius_norm(h.hessian(x) - fd_hessian(h, x, 1e-5)) < 1e-8);

  // Degenerate direction gives the constant function 1.
  const TestFunction c = TestFunction::softplus_radial(Vector::Zero(2));
  CHECK(c.value(x) == 1.0);
  CHECK(c.gradient(x).norm() == 0.0);
}

TEST_CASE("catalog lists the three families") {
  const auto catalog = testfn::family_catalog();
  REQUIRE(catalog.size() == 3);
  CHECK(catalog[0].name == "quadratic");
  CHECK(catalog[1].name == "cosine");
  CHECK(catalog[2].name == "softplus_radial");
}

}  // TEST_SUITE
