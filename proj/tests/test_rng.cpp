#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "mcltsgd/rng.hpp"

using mcltsgd::rng::Stream;

TEST_SUITE("rng") {

TEST_CASE("identical (seed, stream) pairs replay identical draws") {
  Stream a(42, 7);
  Stream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Stream c(42, 7);
  Stream d(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("different stream indices give different draws") {
  Stream a(42, 0);
  Stream b(42, 1);
  int equal = 0;
  for (int i = 0; i < 64; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);

  Stream c(42, 0);
  Stream d(43, 0);
  equal = 0;
  for (int i = 0; i < 64; ++i) equal += c.next_u64() == d.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("uniform stays in [0, 1) with the right first two moments") {
  Stream s(2026, 0);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum_sq += u * u;
  }
  const double tol = 4.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum / n - 0.5) < tol);
  CHECK(std::abs(sum_sq / n - 1.0 / 3.0) < tol);
}

TEST_CASE("normal deviates match the first four moments") {
  Stream s(2026, 1);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  const double tol = 4.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(m1 / n) < tol);               // sd of mean = 1/sqrt(n)
  CHECK(std::abs(m2 / n - 1.0) < 2.0 * tol);   // var of z^2 = 2
  CHECK(std::abs(m4 / n - 3.0) < 10.0 * tol);  // var of z^4 = 96
}

TEST_CASE("rademacher is a fair sign") {
  Stream s(2026, 2);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = s.rademacher();
    CHECK(std::abs(r) == 1.0);
    sum += r;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("parallel streams are uncorrelated") {
  Stream a(99, 10);
  Stream b(99, 11);
  const int n = 100000;
  double cross = 0.0;
  for (int i = 0; i < n; ++i) cross += a.normal() * b.normal();
  CHECK(std::abs(cross / n) < 4.0 / std::sqrt(static_cast<double>(n)));
}

}  // TEST_SUITE
