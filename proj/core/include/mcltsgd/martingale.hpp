#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcltsgd/linalg.hpp"
#include "mcltsgd/rng.hpp"
#include "mcltsgd/test_functions.hpp"

namespace mcltsgd::martingale {

using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::Vector;

enum class Kind {
  kIidRademacher,
  kIidGaussian,
  kDeterministicVarying,
  kSignHistory,
};

std::string kind_name(Kind kind);
Kind kind_from_string(const std::string& s);

// E||Z||^3 for Z standard normal in R^dim: 2^{3/2} Gamma((d+3)/2) / Gamma(d/2).
double gaussian_abs_moment3(int dim);

// Worst conditional E[||X_k||^3 | F] for the sign_history kind: every
// coordinate in the three-point regime {-2, 0, +2} with probs {1/8, 3/4, 1/8}.
double sign_history_worst_moment3(int dim);

// Martingale difference sequence X_1..X_n with E[X_k | F_{k-1}] = 0 and a
// deterministic per-step conditional covariance V_k. Carries the moment
// constants used by the closed-form bounds:
//   alpha I <= V_k <= beta I,  E||X_k||^3 <= gamma d^{3/2},
//   E[||X_k||^3 | F_{k-1}] <= delta Tr(V_k)  (no additive part).
struct Model {
  Kind kind = Kind::kIidRademacher;
  int dim = 1;
  int horizon = 1;
  // deterministic_varying only: per-axis standard deviations, row k-1 gives
  // the diagonal scales of step k (V_k = diag(sigmas.row(k-1))^2).
  Matrix sigmas;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double delta = 1.0;

  // X_k uniform on {-1,+1}^d; V_k = I.
  static Model iid_rademacher(int dim, int horizon);
  // X_k standard normal; V_k = I.
  static Model iid_gaussian(int dim, int horizon);
  // X_{k,i} = sigmas(k-1,i) * (independent sign); V_k = diag(sigmas row)^2.
  static Model deterministic_varying(const Matrix& sigmas);
  // Isotropic convenience overload: V_k = scales[k-1]^2 I.
  static Model deterministic_varying(int dim, const std::vector<double>& scales);
  // Per coordinate: sign of the coordinate's running sum selects between a
  // fair sign in {-1,+1} (sum >= 0) and {-2,0,+2} with probs {1/8,3/4,1/8}
  // (sum < 0); both regimes have conditional mean 0 and variance 1, so
  // V_k = I deterministically while third moments depend on the past.
  static Model sign_history(int dim, int horizon);

  std::string name() const { return kind_name(kind); }
};

// Exact per-step covariance bookkeeping: V_k, running sums, tails
// P_k = sum_{i=k}^n V_i, and the total Sigma = P_1.
class CovarianceLedger {
 public:
  explicit CovarianceLedger(const Model& model);

  int dim() const { return dim_; }
  int horizon() const { return n_; }
  const Matrix& v(int k) const;     // V_k, k in 1..n
  const Matrix& vbar(int k) const;  // V_1 + ... + V_k
  const Matrix& p(int k) const;     // V_k + ... + V_n
  const SpdMatrix& sigma() const { return sigma_; }

  // ||Sigma^{1/2} P_k^{-1} Sigma^{1/2}||_2^{1/2} (the form used by the bound)
  double w_statement(int k) const;
  // ||P_k^{-1/2} Sigma^{1/2}||_2 (equal in exact arithmetic)
  double w_proof(int k) const;

 private:
  int dim_ = 0;
  int n_ = 0;
  std::vector<Matrix> v_, vbar_, p_;
  std::vector<double> w_statement_, w_proof_;
  SpdMatrix sigma_ = SpdMatrix::identity(1);
};

// One sampled difference sequence; row k-1 is X_k.
Matrix sample_path(const Model& model, rng::Stream& stream);
Matrix sample_path(const Model& model, std::uint64_t seed,
                   std::uint64_t replication = 0);

struct BoundEstimate {
  double value = 0.0;
  double stderr_value = 0.0;  // 0 when every path gives the same sum
};

// (3pi/8) sqrt(d) M2(h) sum_k E[w_k ||Sigma^{-1/2} X_k||^3] with the norm
// factor w_k exact from the ledger and the expectation averaged over
// `replications` sampled paths.
BoundEstimate thm1_bound(const Model& model, const testfn::TestFunction& h,
                         int replications, std::uint64_t seed);

// (3pi/4) (gamma sqrt(beta) / alpha^2) m2 d^2 / sqrt(n)
double cor1_bound(double alpha, double beta, double gamma, int d, int n,
                  double m2);

// 2 m1/sqrt(n) Tr(Sigma/n)^{1/2}
//   + (3pi/4) delta sqrt(d) n m2 ||Sigma^{-1/2}||_2^3 (Tr(Sigma/n) + beta^{2/3})
double cor2_bound(double m1, double m2, const SpdMatrix& sigma, double beta,
                  double delta, int d, int n);

// Monte Carlo estimate of E[||I - Sigma^{-1} P_1||_*]^{1/2} from realized
// per-path P_1 matrices (nuclear norm).
double p1_deviation(const std::vector<Matrix>& p1_samples,
                    const SpdMatrix& sigma);

struct EnumerationResult {
  double exact_gap = 0.0;       // |E h(Sigma^{-1/2} S_n) - E h(Z)|
  double exact_bound = 0.0;     // Theorem-1 right-hand side, enumerated
  double eh_model = 0.0;        // E h(Sigma^{-1/2} S_n)
  double eh_gauss = 0.0;        // E h(Z) by Gauss-Hermite
  std::int64_t path_count = 0;
};

// Full-path enumeration over the model's finite conditional supports.
// Requires support^n <= 10^7 and n <= n_max; throws SupportTooLarge
// otherwise (and for models without finite support).
EnumerationResult enumerate_oracle(const Model& model,
                                   const testfn::TestFunction& h,
                                   int n_max = 14);

}  // namespace mcltsgd::martingale
