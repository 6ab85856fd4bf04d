#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mcltsgd/bounds.hpp"
#include "mcltsgd/linalg.hpp"
#include "mcltsgd/martingale.hpp"
#include "mcltsgd/rng.hpp"
#include "mcltsgd/sgd.hpp"
#include "mcltsgd/test_functions.hpp"

namespace mcltsgd::mc {

using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::Vector;

// Worker count: the MCLT_SGD_THREADS environment variable wins when set to
// a positive integer (so an operator can pin parallelism without editing
// scripts), else `requested` > 0, else the hardware concurrency (at least
// 1). The partitioning keeps results bit-identical for any worker count.
int resolve_threads(int requested = 0);

// Runs body(0..count-1) on up to `threads` workers using a static block
// partition. Results must be written into preallocated per-index slots;
// any reduction the caller performs afterwards in index order is then
// bit-reproducible regardless of scheduling. The first exception thrown by
// a worker is rethrown after all workers join.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

// Counter-based replication stream: identical (master_seed, replication)
// yields an identical stream, distinct replications are statistically
// independent.
inline rng::Stream seed_stream(std::uint64_t master_seed,
                               std::uint64_t replication) {
  return rng::Stream(master_seed, replication);
}

enum class ReferenceMethod { kAuto, kAnalytic, kQuadrature, kMonteCarlo };

struct ReferenceValue {
  double value = 0.0;
  // Conservative error estimate: 0 for closed forms, a quadrature-refinement
  // difference for Gauss-Hermite, one standard error for Monte Carlo.
  double error = 0.0;
  std::string method = "analytic";
};

// E h(cov^{1/2} Z + mean) for Z standard normal. kAuto picks the cheapest
// exact route: closed forms for the cosine and quadratic families, a 1-D
// Gauss-Hermite profile integral for ridge functions (any dimension). An
// explicit kQuadrature request keeps the profile route for ridge families
// and uses tensor Gauss-Hermite otherwise, which only exists for d <= 3
// (DimTooLargeForQuadrature beyond). kAnalytic on a family without a
// closed form throws ConfigError.
ReferenceValue reference_expectation(
    const testfn::TestFunction& h, const Vector& mean, const SpdMatrix& cov,
    ReferenceMethod method = ReferenceMethod::kAuto,
    long mc_replications = 200000, std::uint64_t mc_seed = 20260815);

// One certified discrepancy measurement: the empirical mean of h over R
// standardized replications against the Gaussian reference expectation,
// with every applicable bound recorded next to it.
struct DiscrepancyReport {
  std::string experiment;
  std::string engine;  // martingale | linear | sgd
  int dim = 0;
  long t_or_n = 0;       // martingale horizon n or iteration count t
  std::string function;  // test-function name
  long replications = 0;

  double empirical_mean_h = 0.0;
  double reference_mean_h = 0.0;
  double reference_error = 0.0;
  // gap = |empirical_mean_h - reference_mean_h|; its stderr combines the
  // replication standard error with the reference error in quadrature.
  double gap = 0.0;
  double gap_stderr = 0.0;
  // Secondary coupled estimator E|h(standardized) - h(reference draw)|,
  // reference draws taken from an independent salted stream per
  // replication. Reported for completeness; bounds certify `gap`.
  double coupled_mean_abs = 0.0;

  // Named bound values applicable to this standardization, in emission
  // order (thm1/cor1/cor2 for martingale, thm3 for linear, thm4 for sgd).
  std::vector<std::pair<std::string, double>> bound_values;
  // True iff gap <= b + 3 gap_stderr for every recorded bound b.
  bool certified = false;

  // sgd engine only: the same gap measured under the display's
  // Sigma_t^{-1/2} scaling of the averaged residual (which collapses to 0
  // as t grows instead of standardizing); NaN elsewhere.
  double printed_gap = std::numeric_limits<double>::quiet_NaN();
  double printed_gap_stderr = std::numeric_limits<double>::quiet_NaN();

  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;  // excluded from deterministic artifacts
};

// |E h(Sigma^{-1/2} S_n) - E h(Z)| for a martingale model, with the
// increment-sum bound and both corollary envelopes recorded. The bound's
// own Monte Carlo expectation (exact for models with deterministic
// increment norms) uses an independent salted stream.
DiscrepancyReport martingale_discrepancy(const martingale::Model& model,
                                         const testfn::TestFunction& h,
                                         long replications,
                                         std::uint64_t seed, int threads = 0,
                                         const std::string& experiment_id =
                                             "mclt");

// |E h(sqrt(t) avg-residual) - E h(A^{-1} V^{1/2} Z)| for the linear
// recursion started at Delta_0 = delta0 (theta* = 0), with the averaged
// iterate bound recorded. Zero noise degenerates to a single deterministic
// trajectory against the point-mass reference h(0), stderr 0.
DiscrepancyReport linear_discrepancy(
    const SpdMatrix& a, const sgd::StepSchedule& schedule,
    const Vector& delta0, int t, const sgd::NoiseModel& noise,
    const testfn::TestFunction& h, long replications, std::uint64_t seed,
    const bounds::BoundConstants& consts, int threads = 0,
    const std::string& experiment_id = "linear");

// |E h(U_t) - E h(Z)| with U_t = sqrt(t) (H^{-1}VH^{-1})^{-1/2} avg-residual
// for a smooth strongly convex objective, certified against the
// smooth-objective bound. Also measures the display-scaled
// Sigma_t^{-1/2} avg-residual gap (printed_gap) for comparison.
// Throws SingularTail for zero noise.
DiscrepancyReport sgd_discrepancy(const sgd::SgdProblem& problem,
                                  const sgd::StepSchedule& schedule,
                                  const Vector& theta0, int t,
                                  const testfn::TestFunction& h,
                                  long replications, std::uint64_t seed,
                                  const bounds::BoundConstants& consts,
                                  int threads = 0,
                                  const std::string& experiment_id = "sgd");

// Sample covariance (1/(R-1) normalization) of R >= 2 equal-length vectors.
// Throws InsufficientReplications otherwise.
Matrix empirical_covariance(const std::vector<Vector>& samples);

// sqrt(t) * avg-residual per replication for the linear engine, in
// replication order; feed to empirical_covariance to check convergence to
// the limit covariance A^{-1} V A^{-1}.
std::vector<Vector> linear_scaled_averages(const SpdMatrix& a,
                                           const sgd::StepSchedule& schedule,
                                           const Vector& delta0, int t,
                                           const sgd::NoiseModel& noise,
                                           long replications,
                                           std::uint64_t seed,
                                           int threads = 0);

}  // namespace mcltsgd::mc
