#include "mcltsgd/sgd.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "mcltsgd/errors.hpp"
#include "mcltsgd/martingale.hpp"
#include "mcltsgd/quadrature.hpp"

namespace mcltsgd::sgd {

namespace {

constexpr double kDivergenceGuard = 1e8;

bool nearly_isotropic(const Matrix& c) {
  const double scale = c.diagonal().mean();
  return (c - scale * Matrix::Identity(c.rows(), c.cols())).norm() <=
         1e-12 * std::max(1.0, std::abs(scale));
}

// E[S^{3/2}] for S = sum_i lam_i z_i^2 with z ~ N(0, I), via the exact
// reduction  E S^{3/2} = (1/(2 sqrt(pi))) Int_0^inf (E S + phi'(u)) u^{-3/2} du
// where phi(u) = E e^{-uS} = prod_i (1 + 2 lam_i u)^{-1/2}.  Substituting
// u = w^2 makes the integrand analytic at 0; the integrand is evaluated in the
// cancellation-free form  E S + phi'(u) = ES (-expm1(L) + e^L u r),
// L = -1/2 sum log1p(2 lam_i u), r = (2/ES) sum lam_i^2 / (1 + 2 lam_i u).
// After normalizing lam_max = 1, truncating at w = W leaves a remainder of
// ES/W (added back exactly) minus a tail bounded by d / (6 W^3).
double weighted_chisq_moment3(Vector lam) {
  const double lam_max = lam.maxCoeff();
  if (!(lam_max > 0.0)) return 0.0;
  lam /= lam_max;
  const double es = lam.sum();
  const auto integrand = [&](double w) {
    const double u = w * w;
    double log_sum = 0.0;
    double r = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      log_sum += std::log1p(2.0 * lam[i] * u);
      r += lam[i] * lam[i] / (1.0 + 2.0 * lam[i] * u);
    }
    const double l = -0.5 * log_sum;
    const double g = es * (-std::expm1(l)) + std::exp(l) * 2.0 * u * r;
    return g / u;
  };
  const quadrature::Rule gl = quadrature::gauss_legendre(32);
  double total = 0.0;
  double lo = 0.0;
  for (double hi = 0.125; lo < 1.0e5; lo = hi, hi *= 2.0) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int k = 0; k < gl.nodes.size(); ++k) {
      total += half * gl.weights[k] * integrand(mid + half * gl.nodes[k]);
    }
  }
  total += es / lo;
  return std::pow(lam_max, 1.5) * total / std::sqrt(std::numbers::pi);
}

}  // namespace

StepSchedule::StepSchedule(double eta0, double c3) : eta0_(eta0), c3_(c3) {
  if (!(eta0 > 0.0)) throw ConfigError("StepSchedule: eta0 must be positive");
  if (!(c3 >= 0.0 && c3 < 1.0)) {
    throw ConfigError("StepSchedule: c3 must lie in [0, 1)");
  }
}

double StepSchedule::eta(int t) const {
  if (t < 1) throw IndexOrder("StepSchedule::eta: t must be >= 1");
  return eta0_ * std::pow(static_cast<double>(t), -c3_);
}

double StepSchedule::partial_sum(int j, int i) const {
  if (j < 1 || i < j) {
    throw IndexOrder("partial_sum: need 1 <= j <= i");
  }
  double acc = 0.0;
  for (int k = j; k <= i; ++k) acc += eta(k);
  return acc;
}

double schedule_partial_sums(const StepSchedule& schedule, int j, int i) {
  return schedule.partial_sum(j, i);
}

NoiseModel NoiseModel::zero(int dim) {
  if (dim < 1) throw ConfigError("NoiseModel::zero: dim must be >= 1");
  NoiseModel n;
  n.kind_ = Kind::kZero;
  n.dim_ = dim;
  n.v_ = Matrix::Zero(dim, dim);
  n.v_half_ = Matrix::Zero(dim, dim);
  return n;
}

NoiseModel NoiseModel::gaussian(const SpdMatrix& v) {
  NoiseModel n;
  n.kind_ = Kind::kGaussian;
  n.dim_ = v.dim();
  n.v_ = v.matrix();
  n.v_half_ = v.sqrt();
  return n;
}

NoiseModel NoiseModel::scaled_rademacher(const SpdMatrix& v) {
  NoiseModel n;
  n.kind_ = Kind::kScaledRademacher;
  n.dim_ = v.dim();
  n.v_ = v.matrix();
  n.v_half_ = v.sqrt();
  return n;
}

std::string NoiseModel::name() const {
  switch (kind_) {
    case Kind::kZero: return "zero";
    case Kind::kGaussian: return "gaussian";
    case Kind::kScaledRademacher: return "scaled_rademacher";
  }
  throw ConfigError("unknown noise kind");
}

Vector NoiseModel::sample(rng::Stream& stream) const {
  Vector g(dim_);
  switch (kind_) {
    case Kind::kZero:
      g.setZero();
      return g;
    case Kind::kGaussian:
      for (int i = 0; i < dim_; ++i) g[i] = stream.normal();
      return v_half_ * g;
    case Kind::kScaledRademacher:
      for (int i = 0; i < dim_; ++i) g[i] = stream.rademacher();
      return v_half_ * g;
  }
  throw ConfigError("unknown noise kind");
}

ThirdMoment NoiseModel::standardized_third_moment(const Matrix& m) const {
  if (m.cols() != dim_) {
    throw ConfigError("standardized_third_moment: dimension mismatch");
  }
  ThirdMoment out;
  if (kind_ == Kind::kZero) {
    out.value = 0.0;
    out.provenance = "analytic";
    return out;
  }
  const Matrix b = m * v_half_;  // zeta = V^{1/2} g with g standardized
  if (kind_ == Kind::kScaledRademacher) {
    if (dim_ > 20) {
      throw ConfigError("standardized_third_moment: enumeration needs d <= 20");
    }
    // Exact mean of ||B s||^3 over all sign patterns (half by symmetry).
    const std::int64_t patterns = std::int64_t{1} << dim_;
    double acc = 0.0;
    Vector s(dim_);
    for (std::int64_t bits = 0; bits < patterns; ++bits) {
      for (int i = 0; i < dim_; ++i) {
        s[i] = (bits >> i) & 1 ? 1.0 : -1.0;
      }
      acc += std::pow((b * s).squaredNorm(), 1.5);
    }
    out.value = acc / static_cast<double>(patterns);
    out.provenance = "enumerated";
    return out;
  }
  // Gaussian: E||B z||^3 depends only on C = B B'.
  const Matrix c = b * b.transpose();
  if (nearly_isotropic(c)) {
    const double scale = c.diagonal().mean();
    out.value = std::pow(scale, 1.5) *
                martingale::gaussian_abs_moment3(static_cast<int>(c.rows()));
    out.provenance = "analytic";
    return out;
  }
  const linalg::Spectrum spec =
      linalg::spectral_decompose(linalg::symmetrize(c));
  out.value = weighted_chisq_moment3(spec.eigenvalues);
  out.provenance = "quadrature";
  return out;
}

SgdProblem SgdProblem::quadratic(const SpdMatrix& a, const Vector& b,
                                 const NoiseModel& noise) {
  if (b.size() != a.dim()) {
    throw ConfigError("quadratic problem: b dimension mismatch");
  }
  if (noise.dim() != a.dim()) {
    throw ConfigError("quadratic problem: noise dimension mismatch");
  }
  SgdProblem p;
  p.kind_ = Kind::kQuadratic;
  p.dim_ = a.dim();
  p.a_ = a.matrix();
  p.a_spd_ = a;
  p.b_ = b;
  p.theta_star_ = a.matrix().ldlt().solve(b);
  p.hessian_at_min_ = a;
  p.mu_ = a.lambda_min();
  p.lipschitz_ = a.lambda_max();
  p.hessian_lipschitz_ = 0.0;
  p.noise_ = noise;
  return p;
}

SgdProblem SgdProblem::logcosh_ridge(const Matrix& design,
                                     const Vector& targets, double ridge,
                                     const NoiseModel& noise) {
  const int m = static_cast<int>(design.rows());
  const int d = static_cast<int>(design.cols());
  if (m < 1 || d < 1) throw ConfigError("logcosh_ridge: empty design");
  if (targets.size() != m) {
    throw ConfigError("logcosh_ridge: targets length mismatch");
  }
  if (!(ridge > 0.0)) {
    throw ConfigError("logcosh_ridge: ridge must be positive");
  }
  if (noise.dim() != d) {
    throw ConfigError("logcosh_ridge: noise dimension mismatch");
  }
  SgdProblem p;
  p.kind_ = Kind::kLogcoshRidge;
  p.dim_ = d;
  p.design_ = design;
  p.targets_ = targets;
  p.ridge_ = ridge;
  p.noise_ = noise;
  p.mu_ = ridge;
  const Matrix gram = design.transpose() * design / m;
  p.lipschitz_ = linalg::operator_norm(gram) + ridge;
  // |d/du sech^2(u)| peaks at 4/(3 sqrt(3)).
  double mean_cube = 0.0;
  for (int i = 0; i < m; ++i) mean_cube += std::pow(design.row(i).norm(), 3.0);
  mean_cube /= m;
  p.hessian_lipschitz_ = 4.0 / (3.0 * std::sqrt(3.0)) * mean_cube;

  // Newton solve for the minimizer; the objective is smooth and strongly
  // convex, so this converges quadratically from the origin.
  Vector theta = Vector::Zero(d);
  for (int it = 0; it < 100; ++it) {
    const Vector g = p.gradient_impl(theta);
    if (g.norm() <= 1e-13) break;
    theta -= p.hessian_impl(theta).ldlt().solve(g);
  }
  if (p.gradient_impl(theta).norm() > 1e-12) {
    throw Error("logcosh_ridge: Newton solve did not reach 1e-12");
  }
  p.theta_star_ = theta;
  p.hessian_at_min_ = SpdMatrix(p.hessian_impl(theta));
  return p;
}

std::string SgdProblem::name() const {
  return kind_ == Kind::kQuadratic ? "quadratic" : "logcosh_ridge";
}

Vector SgdProblem::gradient_impl(const Vector& theta) const {
  if (kind_ == Kind::kQuadratic) {
    return a_ * theta - b_;
  }
  const int m = static_cast<int>(design_.rows());
  Vector g = ridge_ * theta;
  for (int i = 0; i < m; ++i) {
    const double u = design_.row(i).dot(theta) - targets_[i];
    g += std::tanh(u) / m * design_.row(i).transpose();
  }
  return g;
}

Matrix SgdProblem::hessian_impl(const Vector& theta) const {
  if (kind_ == Kind::kQuadratic) {
    return a_;
  }
  const int m = static_cast<int>(design_.rows());
  Matrix h = ridge_ * Matrix::Identity(dim_, dim_);
  for (int i = 0; i < m; ++i) {
    const double u = design_.row(i).dot(theta) - targets_[i];
    const double c = std::cosh(u);
    h += (1.0 / (c * c * m)) * design_.row(i).transpose() * design_.row(i);
  }
  return h;
}

Vector SgdProblem::gradient(const Vector& theta) const {
  return gradient_impl(theta);
}

Matrix SgdProblem::hessian(const Vector& theta) const {
  return hessian_impl(theta);
}

Vector SgdProblem::residual_gradient(const Vector& delta) const {
  if (kind_ == Kind::kQuadratic) {
    return a_ * delta;  // exact: grad f(theta* + delta) with A theta* = b
  }
  return gradient_impl(theta_star_ + delta);
}

const SpdMatrix& SgdProblem::quadratic_matrix() const {
  if (kind_ != Kind::kQuadratic) {
    throw ConfigError("quadratic_matrix: not a quadratic problem");
  }
  return a_spd_;
}

namespace {

std::vector<int> checkpoint_steps(int horizon) {
  std::vector<int> steps;
  for (int j = 1; j < horizon; j *= 2) steps.push_back(j);
  steps.push_back(horizon);
  return steps;
}

Trajectory run_residual(const std::function<Vector(const Vector&)>& grad,
                        const NoiseModel& noise, const StepSchedule& schedule,
                        const Vector& delta0, int horizon, std::uint64_t seed,
                        std::uint64_t replication, RecordMode mode,
                        bool warn_step) {
  const int d = static_cast<int>(delta0.size());
  Trajectory traj;
  traj.dim = d;
  traj.horizon = horizon;
  traj.seed = seed;
  traj.replication = replication;
  traj.mode = mode;
  traj.step_size_warning = warn_step;
  traj.delta0 = delta0;
  if (mode == RecordMode::kFull) {
    traj.deltas.resize(horizon + 1, d);
    traj.deltas.row(0) = delta0.transpose();
    traj.zetas.resize(horizon, d);
  }

  rng::Stream stream(seed, replication);
  const std::vector<int> marks = checkpoint_steps(horizon);
  std::size_t next_mark = 0;

  Vector delta = delta0;
  Vector sum = Vector::Zero(d);
  for (int t = 1; t <= horizon; ++t) {
    sum += delta;  // running sum of Delta_0..Delta_{t-1}
    const double eta = schedule.eta(t);
    const Vector zeta = noise.sample(stream);
    delta -= eta * (grad(delta) + zeta);
    if (!delta.allFinite() || delta.norm() > kDivergenceGuard) {
      char msg[128];
      std::snprintf(msg, sizeof(msg),
                    "residual norm exceeded %.1e at step %d (replication %llu)",
                    kDivergenceGuard, t,
                    static_cast<unsigned long long>(replication));
      throw DivergenceDetected(msg);
    }
    if (mode == RecordMode::kFull) {
      traj.deltas.row(t) = delta.transpose();
      traj.zetas.row(t - 1) = zeta.transpose();
    }
    if (next_mark < marks.size() && marks[next_mark] == t) {
      traj.checkpoints.push_back(
          Checkpoint{t, delta.norm(), (sum / t).norm()});
      ++next_mark;
    }
  }
  traj.delta_final = delta;
  traj.delta_bar = sum / horizon;
  return traj;
}

}  // namespace

Trajectory run_linear(const SpdMatrix& a, const Vector& b,
                      const StepSchedule& schedule, const Vector& theta0,
                      int horizon, const NoiseModel& noise, std::uint64_t seed,
                      std::uint64_t replication, RecordMode mode) {
  if (horizon < 1) throw ConfigError("run_linear: horizon must be >= 1");
  if (theta0.size() != a.dim() || noise.dim() != a.dim()) {
    throw ConfigError("run_linear: dimension mismatch");
  }
  const Vector theta_star = a.matrix().ldlt().solve(b);
  const Matrix am = a.matrix();
  const bool warn = schedule.eta(1) * a.lambda_max() > 1.0;
  return run_residual([&am](const Vector& delta) { return (am * delta).eval(); },
                      noise, schedule, theta0 - theta_star, horizon, seed,
                      replication, mode, warn);
}

Trajectory run_sgd(const SgdProblem& problem, const StepSchedule& schedule,
                   const Vector& theta0, int horizon, std::uint64_t seed,
                   std::uint64_t replication, RecordMode mode) {
  if (horizon < 1) throw ConfigError("run_sgd: horizon must be >= 1");
  if (theta0.size() != problem.dim()) {
    throw ConfigError("run_sgd: theta0 dimension mismatch");
  }
  const bool warn = schedule.eta(1) * problem.lipschitz() > 1.0;
  return run_residual(
      [&problem](const Vector& delta) { return problem.residual_gradient(delta); },
      problem.noise(), schedule, theta0 - problem.theta_star(), horizon, seed,
      replication, mode, warn);
}

Matrix martingale_part(const SgdProblem& problem,
                       const Trajectory& trajectory) {
  if (trajectory.mode != RecordMode::kFull) {
    throw ConfigError("martingale_part: needs a full-record trajectory");
  }
  if (trajectory.dim != problem.dim()) {
    throw ConfigError("martingale_part: dimension mismatch");
  }
  return -trajectory.zetas;
}

}  // namespace mcltsgd::sgd
