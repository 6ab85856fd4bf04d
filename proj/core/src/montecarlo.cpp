#include "mcltsgd/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "mcltsgd/errors.hpp"
#include "mcltsgd/quadrature.hpp"

namespace mcltsgd::mc {

namespace {

// Salts decorrelate auxiliary streams (coupled reference draws, bound
// estimation) from the replication streams without consuming seed space.
constexpr std::uint64_t kCouplingSalt = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kBoundSalt = 0xD1B54A32D192ED03ULL;

struct MeanVar {
  double mean = 0.0;
  double m2 = 0.0;
  long n = 0;

  void add(double x) {
    ++n;
    const double d0 = x - mean;
    mean += d0 / static_cast<double>(n);
    m2 += d0 * (x - mean);
  }
  double variance() const {
    return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  }
  double stderr_of_mean() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Vector standard_normal_vector(rng::Stream& stream, int dim) {
  Vector z(dim);
  for (int j = 0; j < dim; ++j) z(j) = stream.normal();
  return z;
}

// Evaluates the scalar profile of a ridge function at projection value u by
// placing u along the projection direction.
double ridge_profile(const testfn::TestFunction& h, double u) {
  const Vector& a = h.direction();
  const double norm2 = a.squaredNorm();
  if (norm2 == 0.0) return h.value(Vector::Zero(h.dim()));
  return h.value(u / norm2 * a);
}

ReferenceValue ridge_quadrature(const testfn::TestFunction& h,
                                double proj_mean, double proj_var) {
  const double sd = std::sqrt(std::max(0.0, proj_var));
  auto integrate = [&](int points) {
    const quadrature::Rule rule = quadrature::gauss_hermite(points);
    double acc = 0.0;
    for (int i = 0; i < rule.nodes.size(); ++i) {
      acc += rule.weights(i) * ridge_profile(h, proj_mean + sd * rule.nodes(i));
    }
    return acc;
  };
  ReferenceValue out;
  const double v64 = integrate(64);
  const double v48 = integrate(48);
  out.value = v64;
  out.error = std::abs(v64 - v48);
  out.method = "quadrature";
  return out;
}

void finalize_certification(DiscrepancyReport& report) {
  report.certified = true;
  for (const auto& [name, value] : report.bound_values) {
    (void)name;
    if (!(report.gap <= value + 3.0 * report.gap_stderr)) {
      report.certified = false;
    }
  }
}

}  // namespace

int resolve_threads(int requested) {
  if (const char* env = std::getenv("MCLT_SGD_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed > 0) {
      return static_cast<int>(std::min<long>(parsed, 1024));
    }
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers = std::min<std::size_t>(
      count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

ReferenceValue reference_expectation(const testfn::TestFunction& h,
                                     const Vector& mean, const SpdMatrix& cov,
                                     ReferenceMethod method,
                                     long mc_replications,
                                     std::uint64_t mc_seed) {
  if (mean.size() != cov.dim() || h.dim() != cov.dim()) {
    throw ConfigError("reference_expectation: dimension mismatch");
  }
  const int d = cov.dim();
  const testfn::Family family = h.family();

  auto analytic = [&]() -> ReferenceValue {
    ReferenceValue out;
    if (family == testfn::Family::kCosine) {
      const Vector& a = h.direction();
      const double proj_mean = a.dot(mean);
      const double proj_var = a.dot(cov.matrix() * a);
      out.value = std::cos(proj_mean) * std::exp(-0.5 * proj_var);
      return out;
    }
    if (family == testfn::Family::kQuadratic) {
      const Matrix& q = h.quadratic_form();
      out.value = 0.5 * (mean.dot(q * mean) + (q * cov.matrix()).trace());
      return out;
    }
    throw ConfigError("reference_expectation: no closed form for family " +
                      testfn::family_name(family));
  };

  switch (method) {
    case ReferenceMethod::kAnalytic:
      return analytic();
    case ReferenceMethod::kAuto:
      if (family == testfn::Family::kCosine ||
          family == testfn::Family::kQuadratic) {
        return analytic();
      }
      [[fallthrough]];
    case ReferenceMethod::kQuadrature: {
      if (family == testfn::Family::kCosine ||
          family == testfn::Family::kSoftplusRadial) {
        // Ridge functions reduce to a 1-D profile integral over the scalar
        // projection, valid in any dimension.
        const Vector& a = h.direction();
        return ridge_quadrature(h, a.dot(mean), a.dot(cov.matrix() * a));
      }
      if (d > 3) {
        throw DimTooLargeForQuadrature(
            "reference_expectation: tensor quadrature supports d <= 3, got "
            "d = " +
            std::to_string(d));
      }
      auto integrate = [&](int points_per_axis) {
        const quadrature::TensorRule rule =
            quadrature::tensor_gauss_hermite(points_per_axis, d);
        const Matrix sigma_half = cov.sqrt();
        double acc = 0.0;
        for (int i = 0; i < rule.weights.size(); ++i) {
          const Vector x =
              mean + sigma_half * rule.nodes.row(i).transpose();
          acc += rule.weights(i) * h.value(x);
        }
        return acc;
      };
      ReferenceValue out;
      const double v64 = integrate(64);
      const double v32 = integrate(32);
      out.value = v64;
      out.error = std::abs(v64 - v32);
      out.method = "quadrature";
      return out;
    }
    case ReferenceMethod::kMonteCarlo: {
      if (mc_replications < 2) {
        throw InsufficientReplications(
            "reference_expectation: Monte Carlo needs >= 2 replications");
      }
      const Matrix sigma_half = cov.sqrt();
      rng::Stream stream = seed_stream(mc_seed, 0);
      MeanVar acc;
      for (long r = 0; r < mc_replications; ++r) {
        const Vector x = mean + sigma_half * standard_normal_vector(stream, d);
        acc.add(h.value(x));
      }
      ReferenceValue out;
      out.value = acc.mean;
      out.error = acc.stderr_of_mean();
      out.method = "monte_carlo";
      return out;
    }
  }
  throw ConfigError("reference_expectation: unknown method");
}

DiscrepancyReport martingale_discrepancy(const martingale::Model& model,
                                         const testfn::TestFunction& h,
                                         long replications,
                                         std::uint64_t seed, int threads,
                                         const std::string& experiment_id) {
  if (replications < 1) {
    throw InsufficientReplications("martingale_discrepancy: need >= 1 rep");
  }
  if (h.dim() != model.dim) {
    throw ConfigError("martingale_discrepancy: test function dimension " +
                      std::to_string(h.dim()) + " != model dimension " +
                      std::to_string(model.dim));
  }
  const double t0 = now_seconds();
  const int d = model.dim;
  const martingale::CovarianceLedger ledger(model);
  const Matrix sigma_inv_half = ledger.sigma().inv_sqrt();

  std::vector<double> h_vals(static_cast<std::size_t>(replications));
  std::vector<double> coupled(static_cast<std::size_t>(replications));
  parallel_for(static_cast<std::size_t>(replications),
               resolve_threads(threads), [&](std::size_t i) {
                 rng::Stream stream = seed_stream(seed, i);
                 const Matrix path = martingale::sample_path(model, stream);
                 const Vector sn = path.colwise().sum().transpose();
                 h_vals[i] = h.value(sigma_inv_half * sn);
                 rng::Stream ref_stream(seed ^ kCouplingSalt, i);
                 const Vector z = standard_normal_vector(ref_stream, d);
                 coupled[i] = std::abs(h_vals[i] - h.value(z));
               });

  MeanVar h_acc;
  MeanVar coupled_acc;
  for (long i = 0; i < replications; ++i) {
    h_acc.add(h_vals[static_cast<std::size_t>(i)]);
    coupled_acc.add(coupled[static_cast<std::size_t>(i)]);
  }

  const ReferenceValue ref = reference_expectation(
      h, Vector::Zero(d), SpdMatrix::identity(d));

  DiscrepancyReport report;
  report.experiment = experiment_id;
  report.engine = "martingale";
  report.dim = d;
  report.t_or_n = model.horizon;
  report.function = h.name();
  report.replications = replications;
  report.empirical_mean_h = h_acc.mean;
  report.reference_mean_h = ref.value;
  report.reference_error = ref.error;
  report.gap = std::abs(h_acc.mean - ref.value);
  report.gap_stderr = std::hypot(h_acc.stderr_of_mean(), ref.error);
  report.coupled_mean_abs = coupled_acc.mean;
  report.seed = seed;

  const martingale::BoundEstimate t1 =
      martingale::thm1_bound(model, h, replications, seed ^ kBoundSalt);
  report.bound_values.emplace_back("thm1", t1.value);
  report.bound_values.emplace_back(
      "cor1", martingale::cor1_bound(model.alpha, model.beta, model.gamma, d,
                                     model.horizon, h.m2()));
  if (h.m1()) {
    // The shipped models satisfy the conditional third-moment split with
    // beta = 0 and the model's delta.
    report.bound_values.emplace_back(
        "cor2", martingale::cor2_bound(*h.m1(), h.m2(), ledger.sigma(), 0.0,
                                       model.delta, d, model.horizon));
  }
  finalize_certification(report);
  report.runtime_seconds = now_seconds() - t0;
  return report;
}

DiscrepancyReport linear_discrepancy(const SpdMatrix& a,
                                     const sgd::StepSchedule& schedule,
                                     const Vector& delta0, int t,
                                     const sgd::NoiseModel& noise,
                                     const testfn::TestFunction& h,
                                     long replications, std::uint64_t seed,
                                     const bounds::BoundConstants& consts,
                                     int threads,
                                     const std::string& experiment_id) {
  if (replications < 1) {
    throw InsufficientReplications("linear_discrepancy: need >= 1 rep");
  }
  const int d = a.dim();
  if (h.dim() != d || delta0.size() != d || noise.dim() != d) {
    throw ConfigError("linear_discrepancy: dimension mismatch");
  }
  const double t0 = now_seconds();
  const Vector zero_b = Vector::Zero(d);
  const double sqrt_t = std::sqrt(static_cast<double>(t));

  DiscrepancyReport report;
  report.experiment = experiment_id;
  report.engine = "linear";
  report.dim = d;
  report.t_or_n = t;
  report.function = h.name();
  report.seed = seed;

  if (noise.kind() == sgd::NoiseModel::Kind::kZero) {
    // Degenerate dynamics: one deterministic trajectory, point-mass
    // reference at the origin.
    const sgd::Trajectory traj =
        sgd::run_linear(a, zero_b, schedule, delta0, t, noise, seed, 0);
    const double hv = h.value(sqrt_t * traj.delta_bar);
    const double href = h.value(Vector::Zero(d));
    report.replications = 1;
    report.empirical_mean_h = hv;
    report.reference_mean_h = href;
    report.reference_error = 0.0;
    report.gap = std::abs(hv - href);
    report.gap_stderr = 0.0;
    report.coupled_mean_abs = report.gap;
  } else {
    const Matrix ref_map = a.inverse() * noise.sqrt_covariance();
    std::vector<double> h_vals(static_cast<std::size_t>(replications));
    std::vector<double> coupled(static_cast<std::size_t>(replications));
    parallel_for(static_cast<std::size_t>(replications),
                 resolve_threads(threads), [&](std::size_t i) {
                   const sgd::Trajectory traj =
                       sgd::run_linear(a, zero_b, schedule, delta0, t, noise,
                                       seed, i);
                   h_vals[i] = h.value(sqrt_t * traj.delta_bar);
                   rng::Stream ref_stream(seed ^ kCouplingSalt, i);
                   const Vector z = standard_normal_vector(ref_stream, d);
                   coupled[i] = std::abs(h_vals[i] - h.value(ref_map * z));
                 });
    MeanVar h_acc;
    MeanVar coupled_acc;
    for (long i = 0; i < replications; ++i) {
      h_acc.add(h_vals[static_cast<std::size_t>(i)]);
      coupled_acc.add(coupled[static_cast<std::size_t>(i)]);
    }
    const Matrix a_inv = a.inverse();
    const SpdMatrix ref_cov(a_inv * noise.covariance() * a_inv);
    const ReferenceValue ref =
        reference_expectation(h, Vector::Zero(d), ref_cov);
    report.replications = replications;
    report.empirical_mean_h = h_acc.mean;
    report.reference_mean_h = ref.value;
    report.reference_error = ref.error;
    report.gap = std::abs(h_acc.mean - ref.value);
    report.gap_stderr = std::hypot(h_acc.stderr_of_mean(), ref.error);
    report.coupled_mean_abs = coupled_acc.mean;
  }

  const bounds::Thm3Result t3 = bounds::thm3_bound(
      a, noise, schedule, t, h, bounds::Delta0Moments::of(delta0), consts);
  report.bound_values.emplace_back("thm3", t3.total);
  finalize_certification(report);
  report.runtime_seconds = now_seconds() - t0;
  return report;
}

DiscrepancyReport sgd_discrepancy(const sgd::SgdProblem& problem,
                                  const sgd::StepSchedule& schedule,
                                  const Vector& theta0, int t,
                                  const testfn::TestFunction& h,
                                  long replications, std::uint64_t seed,
                                  const bounds::BoundConstants& consts,
                                  int threads,
                                  const std::string& experiment_id) {
  if (replications < 1) {
    throw InsufficientReplications("sgd_discrepancy: need >= 1 rep");
  }
  const int d = problem.dim();
  if (h.dim() != d || theta0.size() != d) {
    throw ConfigError("sgd_discrepancy: dimension mismatch");
  }
  if (problem.noise().kind() == sgd::NoiseModel::Kind::kZero) {
    throw SingularTail(
        "sgd_discrepancy: zero noise leaves the standardization undefined");
  }
  const double t0 = now_seconds();
  const double sqrt_t = std::sqrt(static_cast<double>(t));
  const Matrix h_inv = problem.hessian_at_min().inverse();
  const SpdMatrix sandwich(h_inv * problem.noise().covariance() * h_inv);
  // U_t = G_t^{-1/2} t avg-residual with G_t = t H^{-1}VH^{-1}.
  const Matrix u_map = sqrt_t * sandwich.inv_sqrt();
  // Display scaling Sigma_t^{-1/2} (t avg-residual) with Sigma_t = tV,
  // i.e. sqrt(t) V^{-1/2} applied to the average residual.
  const SpdMatrix v_spd(problem.noise().covariance());
  const Matrix printed_map = sqrt_t * v_spd.inv_sqrt();

  std::vector<double> h_vals(static_cast<std::size_t>(replications));
  std::vector<double> printed_vals(static_cast<std::size_t>(replications));
  std::vector<double> coupled(static_cast<std::size_t>(replications));
  parallel_for(static_cast<std::size_t>(replications),
               resolve_threads(threads), [&](std::size_t i) {
                 const sgd::Trajectory traj =
                     sgd::run_sgd(problem, schedule, theta0, t, seed, i);
                 h_vals[i] = h.value(u_map * traj.delta_bar);
                 printed_vals[i] = h.value(printed_map * traj.delta_bar);
                 rng::Stream ref_stream(seed ^ kCouplingSalt, i);
                 const Vector z = standard_normal_vector(ref_stream, d);
                 coupled[i] = std::abs(h_vals[i] - h.value(z));
               });

  MeanVar h_acc;
  MeanVar printed_acc;
  MeanVar coupled_acc;
  for (long i = 0; i < replications; ++i) {
    h_acc.add(h_vals[static_cast<std::size_t>(i)]);
    printed_acc.add(printed_vals[static_cast<std::size_t>(i)]);
    coupled_acc.add(coupled[static_cast<std::size_t>(i)]);
  }

  const ReferenceValue ref = reference_expectation(
      h, Vector::Zero(d), SpdMatrix::identity(d));

  DiscrepancyReport report;
  report.experiment = experiment_id;
  report.engine = "sgd";
  report.dim = d;
  report.t_or_n = t;
  report.function = h.name();
  report.replications = replications;
  report.empirical_mean_h = h_acc.mean;
  report.reference_mean_h = ref.value;
  report.reference_error = ref.error;
  report.gap = std::abs(h_acc.mean - ref.value);
  report.gap_stderr = std::hypot(h_acc.stderr_of_mean(), ref.error);
  report.coupled_mean_abs = coupled_acc.mean;
  report.printed_gap = std::abs(printed_acc.mean - ref.value);
  report.printed_gap_stderr = std::hypot(printed_acc.stderr_of_mean(),
                                         ref.error);
  report.seed = seed;

  const Vector delta0 = theta0 - problem.theta_star();
  const bounds::Thm4Result t4 = bounds::thm4_bound(
      problem, schedule, t, h, bounds::Delta0Moments::of(delta0), consts);
  report.bound_values.emplace_back("thm4", t4.total);
  finalize_certification(report);
  report.runtime_seconds = now_seconds() - t0;
  return report;
}

Matrix empirical_covariance(const std::vector<Vector>& samples) {
  if (samples.size() < 2) {
    throw InsufficientReplications(
        "empirical_covariance: need >= 2 samples, got " +
        std::to_string(samples.size()));
  }
  const int d = static_cast<int>(samples.front().size());
  for (const Vector& s : samples) {
    if (s.size() != d) {
      throw ConfigError("empirical_covariance: inconsistent dimensions");
    }
  }
  Vector mean = Vector::Zero(d);
  for (const Vector& s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const Vector& s : samples) {
    const Vector dev = s - mean;
    cov += dev * dev.transpose();
  }
  cov /= static_cast<double>(samples.size() - 1);
  return cov;
}

std::vector<Vector> linear_scaled_averages(const SpdMatrix& a,
                                           const sgd::StepSchedule& schedule,
                                           const Vector& delta0, int t,
                                           const sgd::NoiseModel& noise,
                                           long replications,
                                           std::uint64_t seed, int threads) {
  if (replications < 1) {
    throw InsufficientReplications("linear_scaled_averages: need >= 1 rep");
  }
  const int d = a.dim();
  if (delta0.size() != d || noise.dim() != d) {
    throw ConfigError("linear_scaled_averages: dimension mismatch");
  }
  const Vector zero_b = Vector::Zero(d);
  const double sqrt_t = std::sqrt(static_cast<double>(t));
  std::vector<Vector> out(static_cast<std::size_t>(replications));
  parallel_for(static_cast<std::size_t>(replications),
               resolve_threads(threads), [&](std::size_t i) {
                 const sgd::Trajectory traj = sgd::run_linear(
                     a, zero_b, schedule, delta0, t, noise, seed, i);
                 out[i] = sqrt_t * traj.delta_bar;
               });
  return out;
}

}  // namespace mcltsgd::mc
