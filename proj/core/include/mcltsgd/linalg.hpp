#pragma once

#include <Eigen/Dense>

#include "mcltsgd/errors.hpp"

namespace mcltsgd::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative Frobenius asymmetry above which inputs are rejected.
inline constexpr double kSymmetryTol = 1e-12;
// lambda_min must exceed kPdTol * lambda_max for a matrix to count as PD.
inline constexpr double kPdTol = 1e-12;

// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;  // columns match eigenvalues
};

// (M + M^T)/2. Throws NotSymmetric if the relative Frobenius asymmetry
// of M exceeds kSymmetryTol (zero matrices are accepted as symmetric).
Matrix symmetrize(const Matrix& m);

Spectrum spectral_decompose(const Matrix& symmetric);

// Symmetric positive definite matrix with a cached spectrum.
// Construction symmetrizes, then rejects non-PD inputs.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& m);
  static SpdMatrix identity(int dim);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& matrix() const { return mat_; }
  const Spectrum& spectrum() const { return spectrum_; }

  double lambda_min() const { return spectrum_.eigenvalues(0); }
  double lambda_max() const { return spectrum_.eigenvalues(dim() - 1); }
  double trace() const { return mat_.trace(); }

  // S^p through the spectrum; p may be negative or fractional.
  Matrix power(double p) const;
  Matrix sqrt() const { return power(0.5); }
  Matrix inv_sqrt() const { return power(-0.5); }
  Matrix inverse() const { return power(-1.0); }

 private:
  Matrix mat_;
  Spectrum spectrum_;
};

// Largest singular value (spectral norm) of a general matrix.
double operator_norm(const Matrix& m);
// Sum of singular values.
double nuclear_norm(const Matrix& m);
double frobenius_norm(const Matrix& m);

}  // namespace mcltsgd::linalg
