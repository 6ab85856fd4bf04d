#include "mcltsgd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcltsgd/errors.hpp"
#include "mcltsgd/rng.hpp"

namespace mcltsgd::bounds {

namespace {

constexpr int kMaxLedgerHorizon = 20000;

void validate_constants(const BoundConstants& c) {
  if (!(c.c2 > 0.0 && c.c2 < 1.0)) {
    throw ConfigError("bound constants: c2 must lie in (0,1)");
  }
  if (!(c.k > 0.0) || !(c.k2 > 0.0) || !(c.c1 > 0.0) || !(c.lambda > 0.0) ||
      c.cprime < 0.0) {
    throw ConfigError("bound constants: K, K2, c1, lambda must be positive "
                      "and C' nonnegative");
  }
}

// Prefix sums M[i] = eta_1 + ... + eta_i (M[0] = 0), so m_j^i = M[i]-M[j-1].
std::vector<double> eta_prefix(const sgd::StepSchedule& schedule, int t) {
  std::vector<double> m(t + 1, 0.0);
  for (int i = 1; i <= t; ++i) m[i] = m[i - 1] + schedule.eta(i);
  return m;
}

double halfpow_sum(int t) {  // sum_{i=1}^t i^{-1/2}
  double acc = 0.0;
  for (int i = 1; i <= t; ++i) acc += 1.0 / std::sqrt(static_cast<double>(i));
  return acc;
}

}  // namespace

RhoValue rho(const sgd::StepSchedule& schedule, int t,
             const BoundConstants& consts) {
  validate_constants(consts);
  if (t < 1) throw ConfigError("rho: t must be >= 1");
  RhoValue out;
  if (t == 1) return out;  // empty sum
  const std::vector<double> m = eta_prefix(schedule, t);
  for (int j = 1; j <= t - 1; ++j) {
    const double eta_j = schedule.eta(j);
    const double decay = std::exp(-2.0 * consts.c1 * (m[t - 1] - m[j - 1]));
    const double scale = consts.cprime / std::pow(eta_j, 1.0 - consts.c2);
    const double mjt = m[t] - m[j - 1];
    // Verbatim: the i-summand m_j^t e^{-lambda m_j^t} (m_j^i - m_j^{i-1})
    // has a constant factor, and the increments telescope to m_j^t.
    const double q = scale * mjt * std::exp(-consts.lambda * mjt) * mjt;
    double q_var = 0.0;
    for (int i = j; i <= t; ++i) {
      const double mji = m[i] - m[j - 1];
      q_var += mji * std::exp(-consts.lambda * mji) * (m[i] - m[i - 1]);
    }
    q_var *= scale;
    out.verbatim += decay + q * q;
    out.variant += decay + q_var * q_var;
  }
  return out;
}

WMatrixLedger::WMatrixLedger(const SpdMatrix& a,
                             const sgd::StepSchedule& schedule, int t)
    : a_(a), t_(t) {
  if (t < 1) throw ConfigError("w_ledger: t must be >= 1");
  if (t > kMaxLedgerHorizon) {
    throw HorizonTooLarge("w_ledger: horizon " + std::to_string(t) +
                          " exceeds " + std::to_string(kMaxLedgerHorizon));
  }
  const int d = a.dim();
  const Vector& lambdas = a.spectrum().eigenvalues;
  std::vector<double> etas(t);  // etas[i] = eta_{i+1}
  for (int i = 0; i < t; ++i) etas[i] = schedule.eta(i + 1);

  b_eigs_.resize(t, d);
  for (int e = 0; e < d; ++e) {
    const double lam = lambdas[e];
    // Backward recursion C_j = I + (I - eta_{j+1} A) C_{j+1}, C_{t-1} = I;
    // then B_0^t = eta_1 C_0 and B_j^t = eta_j C_j for j >= 1.
    std::vector<double> c(t);
    c[t - 1] = 1.0;
    for (int j = t - 2; j >= 0; --j) {
      c[j] = 1.0 + (1.0 - etas[j] * lam) * c[j + 1];
    }
    b_eigs_(0, e) = etas[0] * c[0];
    for (int j = 1; j < t; ++j) b_eigs_(j, e) = etas[j - 1] * c[j];

    // Validate against the defining sum B_j^t = eta_j sum_i prod_k (1-eta_k l).
    for (int j = 0; j < t; ++j) {
      double s = 1.0;
      double prod = 1.0;
      for (int i = j + 1; i <= t - 1; ++i) {
        prod *= 1.0 - etas[i - 1] * lam;
        s += prod;
      }
      const double direct = (j == 0 ? etas[0] : etas[j - 1]) * s;
      validation_error_ =
          std::max(validation_error_, std::abs(direct - b_eigs_(j, e)));
    }
  }
  if (validation_error_ > 1e-10) {
    throw Error("w_ledger: recursion disagrees with the defining sum by " +
                std::to_string(validation_error_));
  }

  b_norms_.resize(t);
  w_norms_.resize(t);
  for (int j = 0; j < t; ++j) {
    double bn = 0.0, wn = 0.0;
    for (int e = 0; e < d; ++e) {
      bn = std::max(bn, std::abs(b_eigs_(j, e)));
      wn = std::max(wn, std::abs(b_eigs_(j, e) - 1.0 / lambdas[e]));
    }
    b_norms_[j] = bn;
    w_norms_[j] = wn;
  }
}

Matrix WMatrixLedger::b(int j) const {
  const Matrix& q = a_.spectrum().eigenvectors;
  return q * b_eigs_.row(j).asDiagonal() * q.transpose();
}

Matrix WMatrixLedger::w(int j) const {
  return b(j) - a_.inverse();
}

double WMatrixLedger::k2() const {
  return *std::max_element(b_norms_.begin(), b_norms_.end());
}

double WMatrixLedger::sum_w2() const {
  double acc = 0.0;
  for (int j = 1; j <= t_ - 1; ++j) acc += w_norms_[j] * w_norms_[j];
  return acc;
}

double WMatrixLedger::mean_w2() const { return sum_w2() / t_; }

WMatrixLedger w_ledger(const SpdMatrix& a, const sgd::StepSchedule& schedule,
                       int t) {
  return WMatrixLedger(a, schedule, t);
}

BoundConstants spectral_constants(const SpdMatrix& a,
                                  const sgd::StepSchedule& schedule,
                                  const std::vector<int>& calibration) {
  if (schedule.eta(1) * a.lambda_max() > 1.0) {
    throw StepTooLarge("spectral_constants: eta_1 * lambda_max > 1");
  }
  if (calibration.empty()) {
    throw ConfigError("spectral_constants: calibration grid is empty");
  }
  BoundConstants consts;
  consts.k = 1.0;
  consts.c1 = a.lambda_min();
  consts.lambda = a.lambda_min();
  consts.c2 = 0.5;
  consts.k_provenance = "spectral";
  consts.c1_provenance = "spectral";
  consts.lambda_provenance = "spectral";
  consts.c2_provenance = "default";

  // Fit: smallest C' with sum_j ||W_j^t||^2 <= rho(eta, t) on the grid,
  // splitting rho into its exponential part and C'^2 * Q(t).
  double k2 = 0.0;
  double cprime_sq = 0.0;
  for (int t : calibration) {
    const WMatrixLedger ledger(a, schedule, t);
    k2 = std::max(k2, ledger.k2());
    const std::vector<double> m = eta_prefix(schedule, t);
    double exp_part = 0.0;
    double q_part = 0.0;  // sum of q_j^2 at C' = 1
    for (int j = 1; j <= t - 1; ++j) {
      exp_part += std::exp(-2.0 * consts.c1 * (m[t - 1] - m[j - 1]));
      const double mjt = m[t] - m[j - 1];
      const double q = mjt * mjt * std::exp(-consts.lambda * mjt) /
                       std::pow(schedule.eta(j), 1.0 - consts.c2);
      q_part += q * q;
    }
    const double deficit = ledger.sum_w2() - consts.k * exp_part;
    if (deficit > 0.0) {
      cprime_sq = std::max(cprime_sq, deficit / (consts.k * q_part));
    }
  }
  consts.k2 = k2;
  consts.cprime = std::sqrt(cprime_sq);
  consts.k2_provenance = "fitted";
  consts.cprime_provenance = "fitted";
  return consts;
}

Delta0Moments Delta0Moments::of(const Vector& delta0) {
  Delta0Moments m;
  m.mean_norm = delta0.norm();
  m.mean_sq = delta0.squaredNorm();
  return m;
}

namespace {

constexpr double kThmPrefactor = 3.0 * std::numbers::pi / 8.0;  // shown as 1.18

// Standardizer (A^{-1} V A^{-1})^{-1/2} when V is nonzero.
Matrix sandwich_inv_sqrt(const SpdMatrix& a, const Matrix& v) {
  const Matrix a_inv = a.inverse();
  return SpdMatrix(a_inv * v * a_inv).inv_sqrt();
}

}  // namespace

Thm3Result thm3_bound(const SpdMatrix& a, const sgd::NoiseModel& noise,
                      const sgd::StepSchedule& schedule, int t,
                      const testfn::TestFunction& h,
                      const Delta0Moments& delta0,
                      const BoundConstants& consts) {
  validate_constants(consts);
  if (t < 1) throw ConfigError("thm3_bound: t must be >= 1");
  if (!h.m1().has_value()) {
    throw InvalidSmoothness("thm3_bound: test function needs finite m1");
  }
  if (noise.dim() != a.dim()) {
    throw ConfigError("thm3_bound: noise dimension mismatch");
  }
  Thm3Result out;
  const int d = a.dim();
  if (noise.kind() == sgd::NoiseModel::Kind::kZero) {
    out.m3 = sgd::ThirdMoment{0.0, 0.0, "analytic"};
  } else {
    out.m3 = noise.standardized_third_moment(
        sandwich_inv_sqrt(a, noise.covariance()));
  }
  out.term1 = kThmPrefactor * std::sqrt(static_cast<double>(d)) * h.m2() *
              out.m3.value * halfpow_sum(t) / t;

  const RhoValue r = rho(schedule, t, consts);
  out.rho_verbatim = r.verbatim;
  out.rho_variant = r.variant;
  out.kd = noise.kd();
  const double eta0 = schedule.eta0();
  const double noise_part = std::sqrt(out.kd * consts.k * r.verbatim);
  out.term2 = *h.m1() / std::sqrt(static_cast<double>(t)) *
              (consts.k2 * delta0.mean_norm / eta0 + noise_part);
  out.term3 = h.m2() / t *
              (consts.k2 * consts.k2 * delta0.mean_sq / (eta0 * eta0) +
               out.kd * consts.k * r.verbatim);
  out.total = out.term1 + out.term2 + out.term3;
  return out;
}

Cor4Result cor4_bound(double alpha, double beta, double gamma, int d, int t,
                      const testfn::TestFunction& h, double k4, double k5) {
  if (!(alpha > 0.0)) throw InvalidMoment("cor4_bound: alpha must be positive");
  if (beta < 0.0 || gamma < 0.0) {
    throw InvalidMoment("cor4_bound: beta and gamma must be nonnegative");
  }
  if (k4 < 0.0 || k5 < 0.0) {
    throw InvalidMoment("cor4_bound: K4 and K5 must be nonnegative");
  }
  if (d < 1 || t < 1) throw ConfigError("cor4_bound: d, t must be >= 1");
  if (!h.m1().has_value()) {
    throw InvalidSmoothness("cor4_bound: test function needs finite m1");
  }
  Cor4Result out;
  // 2 * (3pi/8) prints as 2.36.
  out.term1 = 2.0 * kThmPrefactor * gamma * std::sqrt(beta) / (alpha * alpha) *
              h.m2() * static_cast<double>(d) * d / std::sqrt(t);
  out.term2 = k4 * *h.m1() * std::sqrt(static_cast<double>(d) / t);
  out.term3 = k5 * h.m2() * static_cast<double>(d) / t;
  out.total = out.term1 + out.term2 + out.term3;
  return out;
}

Thm4Result thm4_bound(const sgd::SgdProblem& problem,
                      const sgd::StepSchedule& schedule, int t,
                      const testfn::TestFunction& h,
                      const Delta0Moments& delta0,
                      const BoundConstants& consts) {
  validate_constants(consts);
  if (t < 1) throw ConfigError("thm4_bound: t must be >= 1");
  if (!h.m1().has_value()) {
    throw InvalidSmoothness("thm4_bound: test function needs finite m1");
  }
  const sgd::NoiseModel& noise = problem.noise();
  if (noise.kind() == sgd::NoiseModel::Kind::kZero) {
    throw SingularTail("thm4_bound: Sigma_t = tV is singular for V = 0");
  }
  const int d = problem.dim();
  const SpdMatrix& hess = problem.hessian_at_min();

  Thm4Result out;
  out.m3 = noise.standardized_third_moment(
      sandwich_inv_sqrt(hess, noise.covariance()));
  out.kd = noise.kd();

  // Exact norm factor: Sigma_t = tV and P_k = (t-k+1)V give
  // ||Sigma_t^{1/2} P_k^{-1} Sigma_t^{1/2}||^{1/2} = sqrt(t/(t-k+1)), so
  // sum_k factor * E||G^{-1/2} X_k||^3 = m3 (1/t) sum_i i^{-1/2} with
  // G = H^{-1} Sigma_t H^{-1} (the X_k live at scale t^{-3/2} under G^{-1/2}).
  const double first_sum = out.m3.value * halfpow_sum(t) / t;
  out.term1 =
      kThmPrefactor * std::sqrt(static_cast<double>(d)) * h.m2() * first_sum;

  const RhoValue r = rho(schedule, t, consts);
  out.rho_verbatim = r.verbatim;
  const double eta0 = schedule.eta0();
  const double mu = problem.mu();
  const double lh = problem.hessian_lipschitz();
  double sum_sqrt_eta = 0.0;
  double sum_eta = 0.0;
  for (int j = 1; j <= t - 1; ++j) {
    const double e = schedule.eta(j);
    sum_sqrt_eta += std::sqrt(e);
    sum_eta += e;
  }
  out.lh_term2 = consts.k * lh * sum_sqrt_eta / std::sqrt(2.0 * mu);
  out.lh_term3 = consts.k * consts.k * lh * lh * sum_eta / (2.0 * mu);

  const double bracket2 = consts.k2 * delta0.mean_norm / eta0 + out.lh_term2 +
                          std::sqrt(out.kd * consts.k * r.verbatim);
  const double bracket3 =
      consts.k2 * consts.k2 * delta0.mean_sq / (eta0 * eta0) + out.lh_term3 +
      out.kd * consts.k * r.verbatim;

  // Derivation-consistent scaling: the standardized quantity is
  // U_t = G_t^{-1/2} t avg-residual, so the remainder enters through
  // ||G_t^{-1/2}|| * t * (remainder of order 1/t) -- no residual 1/t factor.
  // U_t = G_t^{-1/2} t avg-residual: the remainder of sqrt(t) avg-residual
  // has mean norm <= bracket2/sqrt(t), and U_t rescales it by
  // sqrt(t) ||G_t^{-1/2}||, leaving ||G_t^{-1/2}|| bracket2 (t cancels).
  const Matrix h_inv = hess.inverse();
  const SpdMatrix hvh(h_inv * noise.covariance() * h_inv);
  const double g_inv_half_norm =
      1.0 / std::sqrt(static_cast<double>(t) * hvh.lambda_min());
  out.term2 = *h.m1() * g_inv_half_norm * bracket2;
  out.term3 = 1.5 * h.m2() * g_inv_half_norm * g_inv_half_norm * bracket3;
  out.total = out.term1 + out.term2 + out.term3;

  // Printed prefactors, evaluated verbatim for the comparison columns.
  const SpdMatrix v_spd(noise.covariance());
  const double sigma_t_inv_half_norm =
      1.0 / std::sqrt(static_cast<double>(t) * v_spd.lambda_min());
  out.printed_term1 = out.term1 / t;
  out.printed_term2 = *h.m1() * sigma_t_inv_half_norm / t * bracket2;
  out.printed_term3 = 1.5 * h.m2() * sigma_t_inv_half_norm *
                      sigma_t_inv_half_norm / (static_cast<double>(t) * t) *
                      bracket3;
  out.printed_total =
      out.printed_term1 + out.printed_term2 + out.printed_term3;
  out.first_term_provenance = "closed_form";
  return out;
}

sgd::ThirdMoment thm4_first_term_mc(const sgd::SgdProblem& problem, int t,
                                    const testfn::TestFunction& h, int reps,
                                    std::uint64_t seed) {
  if (reps < 2) throw ConfigError("thm4_first_term_mc: reps must be >= 2");
  const sgd::NoiseModel& noise = problem.noise();
  if (noise.kind() == sgd::NoiseModel::Kind::kZero) {
    return sgd::ThirdMoment{0.0, 0.0, "analytic"};
  }
  const SpdMatrix& hess = problem.hessian_at_min();
  const Matrix standardizer = sandwich_inv_sqrt(hess, noise.covariance());
  const double d = problem.dim();
  // Average over replications of sum_k sqrt(t/(t-k+1)) ||G^{-1/2} X_k||^3
  // with X_k = -zeta_k resampled fresh (V_k is deterministic, so marginal
  // resampling matches the conditional law).
  double mean = 0.0;
  double m2acc = 0.0;
  const double t_scale = std::pow(static_cast<double>(t), -1.5);
  for (int r = 0; r < reps; ++r) {
    rng::Stream stream(seed, static_cast<std::uint64_t>(r));
    double acc = 0.0;
    for (int k = 1; k <= t; ++k) {
      const Vector x = -noise.sample(stream);
      const double z = (standardizer * x).norm();
      acc += std::sqrt(static_cast<double>(t) / (t - k + 1)) * z * z * z *
             t_scale;
    }
    const double delta = acc - mean;
    mean += delta / (r + 1);
    m2acc += delta * (acc - mean);
  }
  sgd::ThirdMoment out;
  out.value = kThmPrefactor * std::sqrt(d) * h.m2() * mean;
  out.stderr_value = kThmPrefactor * std::sqrt(d) * h.m2() *
                     std::sqrt(m2acc / (reps - 1) / reps);
  out.provenance = "monte_carlo";
  return out;
}

}  // namespace mcltsgd::bounds
