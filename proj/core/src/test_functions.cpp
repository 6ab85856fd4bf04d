#include "mcltsgd/test_functions.hpp"

#include <cmath>
#include <cstdio>

#include "mcltsgd/errors.hpp"

namespace mcltsgd::testfn {

namespace {

// Semicolon-separated so names stay single CSV cells without quoting.
std::string format_params(const Vector& v) {
  std::string out;
  char buf[64];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%g", v(i));
    if (i) out += ";";
    out += buf;
  }
  return out;
}

}  // namespace

std::string family_name(Family family) {
  switch (family) {
    case Family::kQuadratic: return "quadratic";
    case Family::kCosine: return "cosine";
    case Family::kSoftplusRadial: return "softplus_radial";
  }
  return "unknown";
}

double TestFunction::value(const Vector& x) const {
  switch (family_) {
    case Family::kQuadratic: return 0.5 * x.dot(q_ * x);
    case Family::kCosine: return std::cos(a_.dot(x));
    case Family::kSoftplusRadial: {
      const double u = a_.dot(x);
      return std::sqrt(1.0 + u * u);
    }
  }
  return 0.0;
}

Vector TestFunction::gradient(const Vector& x) const {
  switch (family_) {
    case Family::kQuadratic: return q_ * x;
    case Family::kCosine: return -std::sin(a_.dot(x)) * a_;
    case Family::kSoftplusRadial: {
      const double u = a_.dot(x);
      return (u / std::sqrt(1.0 + u * u)) * a_;
    }
  }
  return Vector::Zero(dim_);
}

Matrix TestFunction::hessian(const Vector& x) const {
  switch (family_) {
    case Family::kQuadratic: return q_;
    case Family::kCosine: return -std::cos(a_.dot(x)) * (a_ * a_.transpose());
    case Family::kSoftplusRadial: {
      const double u = a_.dot(x);
      const double s = 1.0 + u * u;
      return std::pow(s, -1.5) * (a_ * a_.transpose());
    }
  }
  return Matrix::Zero(dim_, dim_);
}

TestFunction TestFunction::quadratic(const Matrix& q) {
  TestFunction h;
  h.family_ = Family::kQuadratic;
  h.dim_ = static_cast<int>(q.rows());
  h.q_ = linalg::symmetrize(q);
  h.m1_ = std::nullopt;
  h.m2_ = linalg::operator_norm(h.q_);
  h.name_ = "quadratic(" + format_params(h.q_.diagonal()) + ")";
  return h;
}

TestFunction TestFunction::cosine(const Vector& a) {
  if (a.norm() == 0.0) {
    throw ConfigError("cosine: direction must be nonzero");
  }
  TestFunction h;
  h.family_ = Family::kCosine;
  h.dim_ = static_cast<int>(a.size());
  h.a_ = a;
  h.m1_ = a.norm();
  h.m2_ = a.squaredNorm();
  h.name_ = "cosine(" + format_params(a) + ")";
  return h;
}

TestFunction TestFunction::softplus_radial(const Vector& a) {
  TestFunction h;
  h.family_ = Family::kSoftplusRadial;
  h.dim_ = static_cast<int>(a.size());
  h.a_ = a;
  h.m1_ = a.norm();
  h.m2_ = a.squaredNorm();
  h.name_ = "softplus_radial(" + format_params(a) + ")";
  return h;
}

std::vector<FamilyInfo> family_catalog() {
  return {
      {Family::kQuadratic, "quadratic", "q: symmetric dxd matrix",
       "unbounded", "||q||_2"},
      {Family::kCosine, "cosine", "a: nonzero direction in R^d", "||a||_2",
       "||a||_2^2"},
      {Family::kSoftplusRadial, "softplus_radial", "a: direction in R^d",
       "||a||_2", "||a||_2^2"},
  };
}

}  // namespace mcltsgd::testfn
