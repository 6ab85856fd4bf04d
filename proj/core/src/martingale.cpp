#include "mcltsgd/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "mcltsgd/errors.hpp"
#include "mcltsgd/quadrature.hpp"

namespace mcltsgd::martingale {

namespace {

constexpr double kThm1Prefactor = 3.0 * std::numbers::pi / 8.0;

double binomial_coefficient(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(n - k + 1.0));
}

void check_shape(int dim, int horizon) {
  if (dim < 1) throw ConfigError("martingale model: dim must be >= 1");
  if (horizon < 1) throw ConfigError("martingale model: horizon must be >= 1");
}

}  // namespace

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::kIidRademacher: return "iid_rademacher";
    case Kind::kIidGaussian: return "iid_gaussian";
    case Kind::kDeterministicVarying: return "deterministic_varying";
    case Kind::kSignHistory: return "sign_history";
  }
  throw ConfigError("unknown martingale kind");
}

Kind kind_from_string(const std::string& s) {
  if (s == "iid_rademacher") return Kind::kIidRademacher;
  if (s == "iid_gaussian") return Kind::kIidGaussian;
  if (s == "deterministic_varying") return Kind::kDeterministicVarying;
  if (s == "sign_history") return Kind::kSignHistory;
  throw ConfigError("unknown martingale kind: " + s);
}

double gaussian_abs_moment3(int dim) {
  if (dim < 1) throw ConfigError("gaussian_abs_moment3: dim must be >= 1");
  return std::exp(1.5 * std::numbers::ln2 +
                  std::lgamma((dim + 3.0) / 2.0) - std::lgamma(dim / 2.0));
}

double sign_history_worst_moment3(int dim) {
  if (dim < 1) throw ConfigError("sign_history_worst_moment3: dim >= 1");
  // ||X||^2 = 4 J with J ~ Binomial(dim, 1/4) when every coordinate draws
  // from {-2, 0, +2}; E||X||^3 = 8 E[J^{3/2}].
  double acc = 0.0;
  for (int j = 0; j <= dim; ++j) {
    const double pj = binomial_coefficient(dim, j) * std::pow(0.25, j) *
                      std::pow(0.75, dim - j);
    acc += pj * std::pow(static_cast<double>(j), 1.5);
  }
  return 8.0 * acc;
}

Model Model::iid_rademacher(int dim, int horizon) {
  check_shape(dim, horizon);
  Model m;
  m.kind = Kind::kIidRademacher;
  m.dim = dim;
  m.horizon = horizon;
  m.alpha = 1.0;
  m.beta = 1.0;
  m.gamma = 1.0;  // ||X||^3 = d^{3/2} surely
  m.delta = std::sqrt(static_cast<double>(dim));
  return m;
}

Model Model::iid_gaussian(int dim, int horizon) {
  check_shape(dim, horizon);
  Model m;
  m.kind = Kind::kIidGaussian;
  m.dim = dim;
  m.horizon = horizon;
  m.alpha = 1.0;
  m.beta = 1.0;
  const double m3 = gaussian_abs_moment3(dim);
  m.gamma = m3 / std::pow(static_cast<double>(dim), 1.5);
  m.delta = m3 / dim;
  return m;
}

Model Model::deterministic_varying(const Matrix& sigmas) {
  if (sigmas.rows() < 1 || sigmas.cols() < 1) {
    throw ConfigError("deterministic_varying: sigmas must be nonempty");
  }
  if ((sigmas.array() <= 0.0).any()) {
    throw ConfigError("deterministic_varying: all scales must be positive");
  }
  Model m;
  m.kind = Kind::kDeterministicVarying;
  m.dim = static_cast<int>(sigmas.cols());
  m.horizon = static_cast<int>(sigmas.rows());
  m.sigmas = sigmas;
  m.alpha = sigmas.array().square().minCoeff();
  m.beta = sigmas.array().square().maxCoeff();
  // ||X_k|| = ||sigmas row k|| surely (independent signs per axis).
  double worst3 = 0.0;
  double worst_ratio = 0.0;
  for (Eigen::Index k = 0; k < sigmas.rows(); ++k) {
    const double norm2 = sigmas.row(k).squaredNorm();
    worst3 = std::max(worst3, std::pow(norm2, 1.5));
    worst_ratio = std::max(worst_ratio, std::sqrt(norm2));
  }
  m.gamma = worst3 / std::pow(static_cast<double>(m.dim), 1.5);
  m.delta = worst_ratio;  // (sum s^2)^{3/2} / Tr(V_k) with Tr(V_k) = sum s^2
  return m;
}

Model Model::deterministic_varying(int dim,
                                   const std::vector<double>& scales) {
  check_shape(dim, static_cast<int>(std::max<std::size_t>(scales.size(), 1)));
  if (scales.empty()) {
    throw ConfigError("deterministic_varying: scales must be nonempty");
  }
  Matrix sigmas(static_cast<Eigen::Index>(scales.size()), dim);
  for (std::size_t k = 0; k < scales.size(); ++k) {
    sigmas.row(static_cast<Eigen::Index>(k)).setConstant(scales[k]);
  }
  return deterministic_varying(sigmas);
}

Model Model::sign_history(int dim, int horizon) {
  check_shape(dim, horizon);
  Model m;
  m.kind = Kind::kSignHistory;
  m.dim = dim;
  m.horizon = horizon;
  m.alpha = 1.0;
  m.beta = 1.0;
  const double worst = sign_history_worst_moment3(dim);
  m.gamma = std::max(1.0, worst / std::pow(static_cast<double>(dim), 1.5));
  m.delta = worst / dim;
  return m;
}

CovarianceLedger::CovarianceLedger(const Model& model)
    : dim_(model.dim), n_(model.horizon) {
  v_.reserve(n_);
  for (int k = 1; k <= n_; ++k) {
    if (model.kind == Kind::kDeterministicVarying) {
      v_.push_back(
          model.sigmas.row(k - 1).array().square().matrix().asDiagonal());
    } else {
      v_.push_back(Matrix::Identity(dim_, dim_));
    }
  }
  vbar_.resize(n_);
  p_.resize(n_);
  Matrix acc = Matrix::Zero(dim_, dim_);
  for (int k = 0; k < n_; ++k) {
    acc += v_[k];
    vbar_[k] = acc;
  }
  acc.setZero();
  for (int k = n_ - 1; k >= 0; --k) {
    acc += v_[k];
    p_[k] = acc;
  }
  try {
    sigma_ = SpdMatrix(p_[0]);
  } catch (const Error&) {
    throw SingularTail("total covariance Sigma is not positive definite");
  }

  const Matrix s_half = sigma_.sqrt();
  w_statement_.resize(n_);
  w_proof_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    try {
      const SpdMatrix tail(p_[k]);
      w_statement_[k] = std::sqrt(
          linalg::operator_norm(s_half * tail.inverse() * s_half));
      w_proof_[k] = linalg::operator_norm(tail.inv_sqrt() * s_half);
    } catch (const Error&) {
      throw SingularTail("partial covariance tail P_" + std::to_string(k + 1) +
                         " is not positive definite");
    }
  }
}

const Matrix& CovarianceLedger::v(int k) const { return v_.at(k - 1); }
const Matrix& CovarianceLedger::vbar(int k) const { return vbar_.at(k - 1); }
const Matrix& CovarianceLedger::p(int k) const { return p_.at(k - 1); }
double CovarianceLedger::w_statement(int k) const {
  return w_statement_.at(k - 1);
}
double CovarianceLedger::w_proof(int k) const { return w_proof_.at(k - 1); }

Matrix sample_path(const Model& model, rng::Stream& stream) {
  const int n = model.horizon;
  const int d = model.dim;
  Matrix path(n, d);
  switch (model.kind) {
    case Kind::kIidRademacher:
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < d; ++i) path(k, i) = stream.rademacher();
      break;
    case Kind::kIidGaussian:
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < d; ++i) path(k, i) = stream.normal();
      break;
    case Kind::kDeterministicVarying:
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < d; ++i)
          path(k, i) = model.sigmas(k, i) * stream.rademacher();
      break;
    case Kind::kSignHistory: {
      Vector sums = Vector::Zero(d);
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < d; ++i) {
          double x;
          if (sums[i] >= 0.0) {
            x = stream.rademacher();
          } else {
            const double u = stream.uniform();
            x = u < 0.125 ? -2.0 : (u < 0.25 ? 2.0 : 0.0);
          }
          path(k, i) = x;
          sums[i] += x;
        }
      }
      break;
    }
  }
  return path;
}

Matrix sample_path(const Model& model, std::uint64_t seed,
                   std::uint64_t replication) {
  rng::Stream stream(seed, replication);
  return sample_path(model, stream);
}

BoundEstimate thm1_bound(const Model& model, const testfn::TestFunction& h,
                         int replications, std::uint64_t seed) {
  if (h.dim() != model.dim) {
    throw ConfigError("thm1_bound: test function dimension mismatch");
  }
  if (replications < 1) {
    throw ConfigError("thm1_bound: replications must be >= 1");
  }
  const CovarianceLedger ledger(model);
  const Matrix s_inv_half = ledger.sigma().inv_sqrt();
  const int n = model.horizon;

  // Sign-symmetric kinds have path-independent increment norms: every
  // replication produces the identical sum, so one pass returns the exact
  // value (zero standard error), bitwise equal to averaging all of them.
  const bool deterministic_norms =
      model.kind == Kind::kIidRademacher ||
      model.kind == Kind::kDeterministicVarying;
  const int passes = deterministic_norms ? 1 : replications;

  double mean = 0.0;
  double m2acc = 0.0;  // running sum of squared deviations (Welford)
  for (int r = 0; r < passes; ++r) {
    rng::Stream stream(seed, static_cast<std::uint64_t>(r));
    const Matrix path = sample_path(model, stream);
    double path_sum = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double z = (s_inv_half * path.row(k - 1).transpose()).norm();
      path_sum += ledger.w_statement(k) * z * z * z;
    }
    const double delta = path_sum - mean;
    mean += delta / (r + 1);
    m2acc += delta * (path_sum - mean);
  }
  const double scale =
      kThm1Prefactor * std::sqrt(static_cast<double>(model.dim)) * h.m2();
  BoundEstimate out;
  out.value = scale * mean;
  if (!deterministic_norms && replications > 1) {
    const double var = m2acc / (replications - 1);
    out.stderr_value = scale * std::sqrt(var / replications);
  }
  return out;
}

double cor1_bound(double alpha, double beta, double gamma, int d, int n,
                  double m2) {
  if (!(alpha > 0.0)) {
    throw InvalidMoment("cor1_bound: alpha must be positive");
  }
  if (beta < 0.0 || gamma < 0.0) {
    throw InvalidMoment("cor1_bound: beta and gamma must be nonnegative");
  }
  if (d < 1 || n < 1) throw ConfigError("cor1_bound: d, n must be >= 1");
  return (3.0 * std::numbers::pi / 4.0) * gamma * std::sqrt(beta) /
         (alpha * alpha) * m2 * static_cast<double>(d) * d / std::sqrt(n);
}

double cor2_bound(double m1, double m2, const SpdMatrix& sigma, double beta,
                  double delta, int d, int n) {
  if (beta < 0.0 || delta < 0.0) {
    throw InvalidMoment("cor2_bound: beta and delta must be nonnegative");
  }
  if (d < 1 || n < 1) throw ConfigError("cor2_bound: d, n must be >= 1");
  if (sigma.dim() != d) throw ConfigError("cor2_bound: sigma must be d x d");
  const double tr_avg = sigma.trace() / n;
  const double inv_half_norm = 1.0 / std::sqrt(sigma.lambda_min());
  const double first = 2.0 * m1 / std::sqrt(n) * std::sqrt(tr_avg);
  const double second = (3.0 * std::numbers::pi / 4.0) * delta *
                        std::sqrt(static_cast<double>(d)) * n * m2 *
                        std::pow(inv_half_norm, 3.0) *
                        (tr_avg + std::pow(beta, 2.0 / 3.0));
  return first + second;
}

double p1_deviation(const std::vector<Matrix>& p1_samples,
                    const SpdMatrix& sigma) {
  if (p1_samples.empty()) {
    throw ConfigError("p1_deviation: need at least one sample");
  }
  const Matrix sigma_inv = sigma.inverse();
  const Matrix eye = Matrix::Identity(sigma.dim(), sigma.dim());
  double mean = 0.0;
  for (const Matrix& p1 : p1_samples) {
    if (p1.rows() != sigma.dim() || p1.cols() != sigma.dim()) {
      throw ConfigError("p1_deviation: sample dimension mismatch");
    }
    mean += linalg::nuclear_norm(eye - sigma_inv * p1);
  }
  mean /= static_cast<double>(p1_samples.size());
  return std::sqrt(mean);
}

namespace {

// One conditional outcome of a single coordinate at one step.
struct Branch {
  double value;
  double prob;
};

void coordinate_support(const Model& model, int step, const Vector& sums,
                        int coord, std::vector<Branch>& out) {
  out.clear();
  switch (model.kind) {
    case Kind::kIidRademacher:
      out.push_back({-1.0, 0.5});
      out.push_back({+1.0, 0.5});
      break;
    case Kind::kDeterministicVarying: {
      const double s = model.sigmas(step - 1, coord);
      out.push_back({-s, 0.5});
      out.push_back({+s, 0.5});
      break;
    }
    case Kind::kSignHistory:
      if (sums[coord] >= 0.0) {
        out.push_back({-1.0, 0.5});
        out.push_back({+1.0, 0.5});
      } else {
        out.push_back({-2.0, 0.125});
        out.push_back({0.0, 0.75});
        out.push_back({+2.0, 0.125});
      }
      break;
    case Kind::kIidGaussian:
      throw SupportTooLarge(
          "enumerate_oracle: iid_gaussian has no finite support");
  }
}

}  // namespace

EnumerationResult enumerate_oracle(const Model& model,
                                   const testfn::TestFunction& h,
                                   int n_max) {
  if (h.dim() != model.dim) {
    throw ConfigError("enumerate_oracle: test function dimension mismatch");
  }
  const int n = model.horizon;
  const int d = model.dim;
  if (n > n_max) {
    throw SupportTooLarge("enumerate_oracle: horizon " + std::to_string(n) +
                          " exceeds n_max " + std::to_string(n_max));
  }
  const int per_coord = model.kind == Kind::kSignHistory ? 3 : 2;
  const double worst_paths =
      std::pow(std::pow(static_cast<double>(per_coord), d), n);
  if (!(worst_paths <= 1e7)) {
    throw SupportTooLarge("enumerate_oracle: up to " +
                          std::to_string(worst_paths) + " paths exceed 1e7");
  }
  if (model.kind == Kind::kIidGaussian) {
    throw SupportTooLarge(
        "enumerate_oracle: iid_gaussian has no finite support");
  }

  const CovarianceLedger ledger(model);
  const Matrix s_inv_half = ledger.sigma().inv_sqrt();

  EnumerationResult out;
  double eh_model = 0.0;
  double bound_sum = 0.0;
  std::int64_t paths = 0;

  // Depth-first walk over steps; within a step, over coordinates. State:
  // partial sum S, per-coordinate running sums (sign_history regimes), the
  // accumulated sum_k w_k ||Sigma^{-1/2} X_k||^3 along the path.
  Vector partial = Vector::Zero(d);
  Vector sums = Vector::Zero(d);
  Vector xk(d);
  std::function<void(int, int, double, double)> walk =
      [&](int step, int coord, double prob, double path_bound) {
        if (coord == d) {
          const Vector step_x = xk;  // deeper levels reuse the xk buffer
          const double z = (s_inv_half * step_x).norm();
          const double contrib = ledger.w_statement(step) * z * z * z;
          partial += step_x;
          sums += step_x;
          if (step == n) {
            eh_model += prob * h.value(s_inv_half * partial);
            bound_sum += prob * (path_bound + contrib);
            ++paths;
          } else {
            walk(step + 1, 0, prob, path_bound + contrib);
          }
          partial -= step_x;
          sums -= step_x;
          return;
        }
        std::vector<Branch> branches;
        coordinate_support(model, step, sums, coord, branches);
        for (const Branch& b : branches) {
          xk[coord] = b.value;
          // sums must reflect only completed coordinates of earlier steps,
          // so the update happens when the step closes (coord == d above).
          walk(step, coord + 1, prob * b.prob, path_bound);
        }
      };
  walk(1, 0, 1.0, 0.0);

  const quadrature::TensorRule tr = quadrature::tensor_gauss_hermite(64, d);
  double eh_gauss = 0.0;
  for (Eigen::Index i = 0; i < tr.nodes.rows(); ++i) {
    eh_gauss += tr.weights[i] * h.value(tr.nodes.row(i).transpose());
  }

  out.eh_model = eh_model;
  out.eh_gauss = eh_gauss;
  out.exact_gap = std::abs(eh_model - eh_gauss);
  out.exact_bound = kThm1Prefactor * std::sqrt(static_cast<double>(d)) *
                    h.m2() * bound_sum;
  out.path_count = paths;
  if (out.exact_gap > out.exact_bound * (1.0 + 1e-12) + 1e-15) {
    throw Error("enumerate_oracle: exact gap exceeds the exact bound");
  }
  return out;
}

}  // namespace mcltsgd::martingale
