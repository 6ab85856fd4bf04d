#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcltsgd/linalg.hpp"
#include "mcltsgd/rng.hpp"

namespace mcltsgd::sgd {

using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::Vector;

// eta_t = eta0 * t^{-c3} for t >= 1. c3 = 0 gives the constant schedule used
// by several exact-ledger checks; decaying schedules need c3 in (0,1).
class StepSchedule {
 public:
  StepSchedule(double eta0, double c3);
  double eta(int t) const;
  double eta0() const { return eta0_; }
  double exponent() const { return c3_; }
  // m_j^i = sum_{k=j}^i eta_k, 1 <= j <= i.
  double partial_sum(int j, int i) const;

 private:
  double eta0_;
  double c3_;
};

double schedule_partial_sums(const StepSchedule& schedule, int j, int i);

struct ThirdMoment {
  double value = 0.0;
  double stderr_value = 0.0;            // 0 for exact provenances
  std::string provenance = "analytic";  // analytic | quadrature | enumerated | monte_carlo
};

// Additive noise for the stochastic gradient: zeta ~ kind with covariance V.
class NoiseModel {
 public:
  enum class Kind { kZero, kGaussian, kScaledRademacher };

  static NoiseModel zero(int dim);
  static NoiseModel gaussian(const SpdMatrix& v);
  static NoiseModel scaled_rademacher(const SpdMatrix& v);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Matrix& covariance() const { return v_; }
  const Matrix& sqrt_covariance() const { return v_half_; }
  double kd() const { return v_.trace(); }  // sup E[||zeta||^2 | F] = Tr(V)
  std::string name() const;

  Vector sample(rng::Stream& stream) const;

  // E||M zeta||^3: exact sign enumeration for scaled Rademacher (d <= 20),
  // analytic for isotropic Gaussian, and an exact Laplace-transform reduction
  // to a one-dimensional integral for anisotropic Gaussians in any dimension.
  ThirdMoment standardized_third_moment(const Matrix& m) const;

 private:
  Kind kind_ = Kind::kZero;
  int dim_ = 0;
  Matrix v_, v_half_;
};

// Strongly convex objective with known minimizer, curvature constants, and
// an additive-noise gradient oracle g(theta) = grad f(theta) + zeta.
class SgdProblem {
 public:
  enum class Kind { kQuadratic, kLogcoshRidge };

  // f(theta) = theta' A theta / 2 - b' theta; minimizer A^{-1} b.
  static SgdProblem quadratic(const SpdMatrix& a, const Vector& b,
                              const NoiseModel& noise);
  // f(theta) = mean_i log cosh(<a_i, theta> - y_i) + ridge/2 ||theta||^2,
  // minimizer solved to gradient norm <= 1e-12 at construction.
  static SgdProblem logcosh_ridge(const Matrix& design, const Vector& targets,
                                  double ridge, const NoiseModel& noise);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::string name() const;

  Vector gradient(const Vector& theta) const;
  Matrix hessian(const Vector& theta) const;
  // Gradient as a function of the residual delta = theta - theta*. For the
  // quadratic kind this is exactly A * delta (bitwise match with run_linear).
  Vector residual_gradient(const Vector& delta) const;

  const Vector& theta_star() const { return theta_star_; }
  const SpdMatrix& hessian_at_min() const { return hessian_at_min_; }
  double mu() const { return mu_; }
  double lipschitz() const { return lipschitz_; }
  double hessian_lipschitz() const { return hessian_lipschitz_; }
  const NoiseModel& noise() const { return noise_; }
  const SpdMatrix& quadratic_matrix() const;  // kQuadratic only

 private:
  SgdProblem() : hessian_at_min_(SpdMatrix::identity(1)) {}

  Vector gradient_impl(const Vector& theta) const;
  Matrix hessian_impl(const Vector& theta) const;

  Kind kind_ = Kind::kQuadratic;
  int dim_ = 0;
  Matrix a_;          // quadratic form
  Vector b_;          // quadratic offset
  Matrix design_;     // logcosh rows a_i
  Vector targets_;    // logcosh y_i
  double ridge_ = 0.0;
  Vector theta_star_;
  SpdMatrix hessian_at_min_;
  SpdMatrix a_spd_ = SpdMatrix::identity(1);
  double mu_ = 0.0;
  double lipschitz_ = 0.0;
  double hessian_lipschitz_ = 0.0;
  NoiseModel noise_ = NoiseModel::zero(1);
};

enum class RecordMode { kSummary, kFull };

struct Checkpoint {
  int step;               // j
  double norm_delta;      // ||Delta_j||
  double norm_delta_bar;  // ||(1/j) sum_{i<j} Delta_i||
};

// One realized run in residual coordinates Delta_t = theta_t - theta*.
struct Trajectory {
  int dim = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  RecordMode mode = RecordMode::kSummary;
  bool step_size_warning = false;  // eta_1 * lambda_max > 1 on entry

  Vector delta0;
  Vector delta_final;
  // (1/t) sum_{i=0}^{t-1} Delta_i -- the average includes Delta_0.
  Vector delta_bar;
  std::vector<Checkpoint> checkpoints;  // powers of two and the horizon

  Matrix deltas;  // (t+1) x d rows Delta_0..Delta_t; kFull only
  Matrix zetas;   // t x d rows zeta_1..zeta_t; kFull only
};

// Delta_t = (I - eta_t A) Delta_{t-1} - eta_t zeta_t with theta* = A^{-1} b.
Trajectory run_linear(const SpdMatrix& a, const Vector& b,
                      const StepSchedule& schedule, const Vector& theta0,
                      int horizon, const NoiseModel& noise, std::uint64_t seed,
                      std::uint64_t replication = 0,
                      RecordMode mode = RecordMode::kSummary);

// theta_t = theta_{t-1} - eta_t (grad f(theta_{t-1}) + zeta_t), run in
// residual form.
Trajectory run_sgd(const SgdProblem& problem, const StepSchedule& schedule,
                   const Vector& theta0, int horizon, std::uint64_t seed,
                   std::uint64_t replication = 0,
                   RecordMode mode = RecordMode::kSummary);

// Per-step martingale increments driving the averaged-iterate bound; for the
// additive-noise oracle these are X_k = -zeta_k. Needs a kFull trajectory.
Matrix martingale_part(const SgdProblem& problem, const Trajectory& trajectory);

}  // namespace mcltsgd::sgd
