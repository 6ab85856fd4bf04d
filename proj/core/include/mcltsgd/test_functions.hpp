#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcltsgd/linalg.hpp"

namespace mcltsgd::testfn {

using linalg::Matrix;
using linalg::Vector;

enum class Family { kQuadratic, kCosine, kSoftplusRadial };

std::string family_name(Family family);

// Smooth test function with known smoothness constants:
//   m1 = Lipschitz constant of h (absent when unbounded),
//   m2 = Lipschitz constant of grad h.
class TestFunction {
 public:
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;

  Family family() const { return family_; }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  std::optional<double> m1() const { return m1_; }
  double m2() const { return m2_; }

  // Defining parameters: direction a for the cosine / softplus families
  // (empty for quadratic), the form Q for the quadratic family.
  const Vector& direction() const { return a_; }
  const Matrix& quadratic_form() const { return q_; }

  // h(x) = x^T Q x / 2, Q symmetric. m1 unbounded, m2 = ||Q||_2.
  static TestFunction quadratic(const Matrix& q);
  // h(x) = cos(<a, x>), a nonzero. m1 = ||a||, m2 = ||a||^2.
  static TestFunction cosine(const Vector& a);
  // h(x) = sqrt(1 + <a, x>^2). m1 = ||a||, m2 = ||a||^2.
  // a = 0 yields the constant function 1.
  static TestFunction softplus_radial(const Vector& a);

 private:
  TestFunction() = default;

  Family family_ = Family::kCosine;
  int dim_ = 0;
  std::string name_;
  std::optional<double> m1_;
  double m2_ = 0.0;
  Matrix q_;
  Vector a_;
};

// One entry per family for discovery output.
struct FamilyInfo {
  Family family;
  std::string name;
  std::string parameters;
  std::string m1;
  std::string m2;
};
std::vector<FamilyInfo> family_catalog();

}  // namespace mcltsgd::testfn
