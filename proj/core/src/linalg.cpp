#include "mcltsgd/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace mcltsgd::linalg {

Matrix symmetrize(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw NotSymmetric("symmetrize: matrix is " + std::to_string(m.rows()) +
                       "x" + std::to_string(m.cols()));
  }
  const double scale = m.norm();
  const double asym = (m - m.transpose()).norm();
  if (scale > 0.0 && asym > kSymmetryTol * scale) {
    throw NotSymmetric("symmetrize: relative asymmetry " +
                       std::to_string(asym / scale) + " exceeds tolerance");
  }
  return 0.5 * (m + m.transpose());
}

Spectrum spectral_decompose(const Matrix& symmetric) {
  const Matrix s = symmetrize(symmetric);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) {
    throw Error("spectral_decompose: eigensolver failed");
  }
  return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

SpdMatrix::SpdMatrix(const Matrix& m) : mat_(symmetrize(m)) {
  spectrum_ = spectral_decompose(mat_);
  const double lo = spectrum_.eigenvalues(0);
  const double hi = spectrum_.eigenvalues(mat_.rows() - 1);
  if (!(lo > kPdTol * hi) || !(hi > 0.0)) {
    throw NotPositiveDefinite("SpdMatrix: lambda_min " + std::to_string(lo) +
                              " fails threshold against lambda_max " +
                              std::to_string(hi));
  }
}

SpdMatrix SpdMatrix::identity(int dim) {
  return SpdMatrix(Matrix::Identity(dim, dim));
}

Matrix SpdMatrix::power(double p) const {
  Vector powered = spectrum_.eigenvalues.array().pow(p);
  return spectrum_.eigenvectors * powered.asDiagonal() *
         spectrum_.eigenvectors.transpose();
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

}  // namespace mcltsgd::linalg
