#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcltsgd/linalg.hpp"
#include "mcltsgd/sgd.hpp"
#include "mcltsgd/test_functions.hpp"

namespace mcltsgd::bounds {

using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::Vector;

// Constants entering the averaged-iterate bounds. The derivation leaves them
// "universal"; restricting to symmetric positive definite curvature lets the
// toolkit derive explicit valid values and record where each came from.
struct BoundConstants {
  double k = 1.0;       // K: product-norm envelope coefficient
  double k2 = 0.0;      // K2: max ||B_j^t||_2 over computed horizons
  double cprime = 0.0;  // C': fitted majorant coefficient
  double c1 = 0.0;      // decay rate in the exponential envelope
  double c2 = 0.5;      // step-size exponent split, in (0,1)
  double lambda = 0.0;  // decay rate inside the q_j factor
  std::string k_provenance = "spectral";
  std::string k2_provenance = "fitted";
  std::string cprime_provenance = "fitted";
  std::string c1_provenance = "spectral";
  std::string c2_provenance = "default";
  std::string lambda_provenance = "spectral";
};

// rho(eta, t) = sum_{j=1}^{t-1} { e^{-2 c1 m_j^{t-1}}
//                + [C'/eta_j^{1-c2} * sum_{i=j}^t m_j^t e^{-lambda m_j^t}
//                  (m_j^i - m_j^{i-1})]^2 }.
// `verbatim` evaluates the display as written (the inner sum telescopes to
// m_j^t since its summand does not depend on i); `variant` moves the
// exponent inside the sum, e^{-lambda m_j^i}, as the derivation's context
// suggests may have been intended. Both are reported; downstream bounds use
// the verbatim value.
struct RhoValue {
  double verbatim = 0.0;
  double variant = 0.0;
};
RhoValue rho(const sgd::StepSchedule& schedule, int t,
             const BoundConstants& consts);

// Exact B_j^t = eta_j sum_{i=j}^{t-1} prod_{k=j+1}^i (I - eta_k A) and
// W_j^t = B_j^t - A^{-1}, computed per eigenvalue of A and validated against
// the direct defining sum to 1e-10.
class WMatrixLedger {
 public:
  WMatrixLedger(const SpdMatrix& a, const sgd::StepSchedule& schedule, int t);

  int horizon() const { return t_; }
  int dim() const { return a_.dim(); }
  Matrix b(int j) const;  // j in 0..t-1
  Matrix w(int j) const;
  double b_norm(int j) const { return b_norms_.at(j); }
  double w_norm(int j) const { return w_norms_.at(j); }
  double k2() const;                // max_j ||B_j^t||_2, including j = 0
  double sum_w2() const;            // sum_{j=1}^{t-1} ||W_j^t||_2^2
  double mean_w2() const;           // sum_w2 / t
  double validation_error() const { return validation_error_; }

 private:
  SpdMatrix a_;
  int t_;
  Matrix b_eigs_;  // t x d: eigenvalues of B_j^t in A's eigenbasis
  std::vector<double> b_norms_, w_norms_;
  double validation_error_ = 0.0;
};

WMatrixLedger w_ledger(const SpdMatrix& a, const sgd::StepSchedule& schedule,
                       int t);

// K = 1 and c1 = lambda = lambda_min(A) (valid for symmetric PD A with
// eta_1 lambda_max <= 1); K2 and C' fitted against exact ledgers on the
// calibration horizons. Throws StepTooLarge when eta_1 lambda_max > 1.
BoundConstants spectral_constants(
    const SpdMatrix& a, const sgd::StepSchedule& schedule,
    const std::vector<int>& calibration = {100, 316, 1000});

struct Delta0Moments {
  double mean_norm = 0.0;  // E||Delta_0||
  double mean_sq = 0.0;    // E||Delta_0||^2
  static Delta0Moments of(const Vector& delta0);
};

struct Thm3Result {
  double term1 = 0.0;  // (3pi/8) sqrt(d) M2 m3 (1/t) sum_k (t-k+1)^{-1/2}
  double term2 = 0.0;  // M1/sqrt(t) [K2 E||D0||/eta0 + sqrt(Kd K rho)]
  double term3 = 0.0;  // M2/t [K2^2 E||D0||^2/eta0^2 + Kd K rho]
  double total = 0.0;
  sgd::ThirdMoment m3;  // E||(A^{-1}VA^{-1})^{-1/2} zeta||^3
  double rho_verbatim = 0.0;
  double rho_variant = 0.0;
  double kd = 0.0;
};

// Bound on |E h(sqrt(t) avg residual) - E h(A^{-1} V^{1/2} Z)| for the linear
// engine. The display coefficient 1.18 is the rounding of 3pi/8, which is
// what the evaluation uses.
Thm3Result thm3_bound(const SpdMatrix& a, const sgd::NoiseModel& noise,
                      const sgd::StepSchedule& schedule, int t,
                      const testfn::TestFunction& h,
                      const Delta0Moments& delta0,
                      const BoundConstants& consts);

struct Cor4Result {
  double term1 = 0.0;  // (3pi/4) gamma sqrt(beta)/alpha^2 m2 d^2 / sqrt(t)
  double term2 = 0.0;  // K4 m1 sqrt(d/t)
  double term3 = 0.0;  // K5 m2 d / t
  double total = 0.0;
};

// alpha I <= A^{-1} V A^{-1} <= beta I and gamma is the standardized third
// moment constant; K4, K5 supplied by the caller with provenance. The first
// coefficient is 2.36 = 2 * (3pi/8) at display precision.
Cor4Result cor4_bound(double alpha, double beta, double gamma, int d, int t,
                      const testfn::TestFunction& h, double k4, double k5);

struct Thm4Result {
  // Derivation-consistent form: standardized averaged residual
  // U_t = G_t^{-1/2} t avg-residual with G_t = H^{-1} Sigma_t H^{-1},
  // H = hessian at the minimizer. These are the certified values.
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  double total = 0.0;
  // The display's prefactors read ||Sigma_t^{-1/2}||/t (resp. squared over
  // t^2, and 3pi/8t): evaluated verbatim for comparison; with Sigma_t = tV
  // growing linearly these collapse faster than the standardized quantity
  // concentrates, so they are reported but not certified against.
  double printed_term1 = 0.0;
  double printed_term2 = 0.0;
  double printed_term3 = 0.0;
  double printed_total = 0.0;
  double lh_term2 = 0.0;  // K L_H sum sqrt(eta_j) / sqrt(2 mu); 0 iff L_H = 0
  double lh_term3 = 0.0;  // K^2 L_H^2 sum eta_j / (2 mu); 0 iff L_H = 0
  sgd::ThirdMoment m3;    // E||(H^{-1}VH^{-1})^{-1/2} zeta||^3
  double rho_verbatim = 0.0;
  double kd = 0.0;
  std::string first_term_provenance = "closed_form";
};

// Averaged-iterate normality bound for smooth strongly convex objectives.
// Additive noise gives V_k = V exactly, so Sigma_t = tV and
// P_k = (t-k+1)V in closed form; the norm factor
// ||Sigma_t^{1/2} P_k^{-1} Sigma_t^{1/2}||^{1/2} is sqrt(t/(t-k+1)) exactly.
Thm4Result thm4_bound(const sgd::SgdProblem& problem,
                      const sgd::StepSchedule& schedule, int t,
                      const testfn::TestFunction& h,
                      const Delta0Moments& delta0,
                      const BoundConstants& consts);

// Estimate-grade Monte Carlo version of the first term's expectation (the
// closed form above is exact for the shipped additive-noise models; this
// exists to cross-check it and to cover hypothetical non-additive noise).
sgd::ThirdMoment thm4_first_term_mc(const sgd::SgdProblem& problem, int t,
                                    const testfn::TestFunction& h, int reps,
                                    std::uint64_t seed);

}  // namespace mcltsgd::bounds
