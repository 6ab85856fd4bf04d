#include "mcltsgd/stein.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "mcltsgd/errors.hpp"

namespace mcltsgd::stein {

namespace {

struct EvalResult {
  double value = 0.0;
  Vector grad;
  Matrix hess;
};

}  // namespace

void SteinSolution::build_tables() {
  const int dim = h_.dim();
  const int order = opts_.gl_order;
  const int panels = opts_.panels;
  const quadrature::Rule gl = quadrature::gauss_legendre(order);

  // Geometric panels over [0, horizon], refined toward 0 where the
  // integrand changes fastest: edges horizon * 2^{j - panels}.
  s_nodes_.resize(panels * order);
  s_weights_.resize(panels * order);
  double lo = 0.0;
  for (int j = 0; j < panels; ++j) {
    const double hi = opts_.horizon * std::pow(2.0, j + 1 - panels);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int k = 0; k < order; ++k) {
      s_nodes_[j * order + k] = mid + half * gl.nodes[k];
      s_weights_[j * order + k] = half * gl.weights[k];
    }
    lo = hi;
  }
  decay_ = (-s_nodes_.array()).exp();
  decay2_ = decay_.array().square();
  spread_ = (1.0 - decay2_.array()).max(0.0).sqrt();

  const quadrature::TensorRule tr =
      quadrature::tensor_gauss_hermite(opts_.gh_points, dim);
  z_mapped_ = tr.nodes * sigma_half_;
  z_weights_ = tr.weights;

  eh_ref_ = 0.0;
  for (Eigen::Index i = 0; i < z_mapped_.rows(); ++i) {
    eh_ref_ += z_weights_[i] * h_.value(z_mapped_.row(i).transpose() + mu_);
  }
}

// Shared evaluator: one pass over the time nodes accumulates the value,
// gradient, and Hessian together (they reuse the same inner expectations).
static EvalResult eval_all(const testfn::TestFunction& h, const Vector& mu,
                           const Matrix& sigma_half, double eh_ref,
                           const Vector& s_weights, const Vector& decay,
                           const Vector& decay2, const Vector& spread,
                           const Matrix& z_mapped, const Vector& z_weights,
                           const Vector& x) {
  const int dim = h.dim();
  const Vector dx = x - mu;
  EvalResult out;
  out.grad = Vector::Zero(dim);
  out.hess = Matrix::Zero(dim, dim);

  if (h.family() == testfn::Family::kQuadratic) {
    // h(y) = y^T Q y / 2: the inner expectation is available in closed form,
    // E h(c + S) = c^T Q c / 2 + tr(Q Cov(S)) / 2.
    const Matrix& q = h.quadratic_form();
    const Matrix sigma = sigma_half * sigma_half;
    const double tr_qs = (q * sigma).trace();
    Vector grad_acc = Vector::Zero(dim);
    double hess_acc = 0.0;
    for (Eigen::Index s = 0; s < s_weights.size(); ++s) {
      const Vector m = decay[s] * dx + mu;
      const double spread2 = 1.0 - decay2[s];
      const double ehs = 0.5 * m.dot(q * m) + 0.5 * spread2 * tr_qs;
      out.value += s_weights[s] * (eh_ref - ehs);
      grad_acc += (s_weights[s] * decay[s]) * (q * m);
      hess_acc += s_weights[s] * decay2[s];
    }
    out.grad = -grad_acc;
    out.hess = -hess_acc * q;
    return out;
  }

  // Remaining families depend on y only through u = <a, y>, so the inner
  // expectation reduces to weighted sums over precomputed projections.
  const Vector& a = h.direction();
  const double u0 = a.dot(dx);
  const double a_mu = a.dot(mu);
  const Eigen::ArrayXd c = (z_mapped * a).array();
  const Eigen::ArrayXd wz = z_weights.array();
  Eigen::ArrayXd u(c.size());

  double grad_acc = 0.0;
  double hess_acc = 0.0;
  if (h.family() == testfn::Family::kCosine) {
    for (Eigen::Index s = 0; s < s_weights.size(); ++s) {
      u = decay[s] * u0 + a_mu + spread[s] * c;
      const double s0 = (wz * u.cos()).sum();   // E cos(u)
      const double s1 = -(wz * u.sin()).sum();  // E d/du cos(u)
      out.value += s_weights[s] * (eh_ref - s0);
      grad_acc += s_weights[s] * decay[s] * s1;
      hess_acc += s_weights[s] * decay2[s] * (-s0);
    }
  } else {
    for (Eigen::Index s = 0; s < s_weights.size(); ++s) {
      u = decay[s] * u0 + a_mu + spread[s] * c;
      const Eigen::ArrayXd r = (1.0 + u.square()).sqrt();
      const double s0 = (wz * r).sum();
      const double s1 = (wz * (u / r)).sum();
      const double s2 = (wz / (r * r * r)).sum();
      out.value += s_weights[s] * (eh_ref - s0);
      grad_acc += s_weights[s] * decay[s] * s1;
      hess_acc += s_weights[s] * decay2[s] * s2;
    }
  }
  out.grad = -grad_acc * a;
  out.hess = -hess_acc * (a * a.transpose());
  return out;
}

double SteinSolution::value(const Vector& x) const {
  return eval_all(h_, mu_, sigma_half_, eh_ref_, s_weights_, decay_, decay2_,
                  spread_, z_mapped_, z_weights_, x)
      .value;
}

Vector SteinSolution::gradient(const Vector& x) const {
  return eval_all(h_, mu_, sigma_half_, eh_ref_, s_weights_, decay_, decay2_,
                  spread_, z_mapped_, z_weights_, x)
      .grad;
}

Matrix SteinSolution::hessian(const Vector& x) const {
  return eval_all(h_, mu_, sigma_half_, eh_ref_, s_weights_, decay_, decay2_,
                  spread_, z_mapped_, z_weights_, x)
      .hess;
}

double SteinSolution::residual(const Vector& x) const {
  const EvalResult r = eval_all(h_, mu_, sigma_half_, eh_ref_, s_weights_,
                                decay_, decay2_, spread_, z_mapped_,
                                z_weights_, x);
  const Matrix sigma = sigma_half_ * sigma_half_;
  const double lhs =
      (sigma.array() * r.hess.array()).sum() - (x - mu_).dot(r.grad);
  return lhs - (h_.value(x) - eh_ref_);
}

SteinSolution stein_solve(const testfn::TestFunction& h, const Vector& mu,
                          const SpdMatrix& sigma, const SteinOptions& opts) {
  const int dim = h.dim();
  if (dim < 1 || dim > 2) {
    throw ConfigError("stein_solve supports dim 1 or 2, got " +
                      std::to_string(dim));
  }
  if (mu.size() != dim || sigma.dim() != dim) {
    throw ConfigError("stein_solve: mu/sigma dimension mismatch");
  }

  const double probe_step = dim == 1 ? 0.5 : 1.0;
  const std::vector<Vector> probes = make_probe_grid(dim, -3.0, 3.0, probe_step);

  SteinOptions current = opts;
  for (int attempt = 0; attempt <= opts.max_refinements; ++attempt) {
    SteinSolution sol;
    sol.h_ = h;
    sol.mu_ = mu;
    sol.sigma_half_ = sigma.sqrt();
    sol.opts_ = current;
    sol.build_tables();

    double worst = 0.0;
    for (const Vector& p : probes) {
      worst = std::max(worst, std::abs(sol.residual(p)));
    }
    sol.achieved_residual_ = worst;
    if (worst <= opts.residual_tol) {
      return sol;
    }
    current.panels *= 2;
    current.horizon += 4.0;
    if (attempt == opts.max_refinements) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "stein_solve residual %.3e above tolerance %.3e after %d "
                    "refinements",
                    worst, opts.residual_tol, opts.max_refinements);
      throw QuadratureNotConverged(msg);
    }
  }
  throw QuadratureNotConverged("stein_solve: unreachable");
}

std::vector<Vector> make_probe_grid(int dim, double lo, double hi,
                                    double step) {
  if (dim < 1 || dim > 2) {
    throw ConfigError("make_probe_grid supports dim 1 or 2");
  }
  if (!(step > 0.0) || !(hi > lo)) {
    throw ConfigError("make_probe_grid: need step > 0 and hi > lo");
  }
  const int n = static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<Vector> grid;
  if (dim == 1) {
    grid.reserve(n);
    for (int i = 0; i < n; ++i) {
      Vector p(1);
      p[0] = lo + i * step;
      grid.push_back(p);
    }
  } else {
    grid.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Vector p(2);
        p[0] = lo + i * step;
        p[1] = lo + j * step;
        grid.push_back(p);
      }
    }
  }
  return grid;
}

double stein_factor_estimate(const SteinSolution& solution,
                             const std::vector<Vector>& probes,
                             double fd_step) {
  if (probes.size() < 2) {
    throw ConfigError("stein_factor_estimate needs at least two probes");
  }
  const int dim = probes.front().size();
  std::vector<Matrix> hessians;
  hessians.reserve(probes.size());
  for (const Vector& x : probes) {
    Matrix hfd(dim, dim);
    for (int i = 0; i < dim; ++i) {
      Vector xp = x;
      Vector xm = x;
      xp[i] += fd_step;
      xm[i] -= fd_step;
      hfd.col(i) = (solution.gradient(xp) - solution.gradient(xm)) /
                   (2.0 * fd_step);
    }
    hessians.push_back(0.5 * (hfd + hfd.transpose()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      const double dist = (probes[i] - probes[j]).norm();
      if (dist < 10.0 * fd_step) continue;  // quotient dominated by FD noise
      const double quot =
          linalg::operator_norm(hessians[i] - hessians[j]) / dist;
      worst = std::max(worst, quot);
    }
  }
  return worst;
}

}  // namespace mcltsgd::stein
