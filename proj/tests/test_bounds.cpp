#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mcltsgd/bounds.hpp"
#include "mcltsgd/errors.hpp"
#include "mcltsgd/test_functions.hpp"

using namespace mcltsgd;
using bounds::BoundConstants;
using bounds::Delta0Moments;
using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::Vector;
using sgd::NoiseModel;
using sgd::SgdProblem;
using sgd::StepSchedule;

namespace {

testfn::TestFunction cos1d() {
  Vector a(1);
  a << 1.0;
  return testfn::TestFunction::cosine(a);
}

testfn::TestFunction cos2d() {
  Vector a(2);
  a << 0.6, 0.8;
  return testfn::TestFunction::cosine(a);
}

SpdMatrix diag12() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, 2.0;
  return SpdMatrix(m);
}

// Direct transcription of the decay-plus-majorant sum, inner sum written
// out term by term exactly as displayed (no telescoping shortcut).
double rho_direct(const StepSchedule& s, int t, const BoundConstants& c) {
  double acc = 0.0;
  for (int j = 1; j <= t - 1; ++j) {
    double m_j_tm1 = 0.0;
    for (int k = j; k <= t - 1; ++k) m_j_tm1 += s.eta(k);
    const double m_j_t = m_j_tm1 + s.eta(t);
    double inner = 0.0;
    double prev = 0.0;  // m_j^{j-1} is the empty sum
    double running = 0.0;
    for (int i = j; i <= t; ++i) {
      running += s.eta(i);
      inner += m_j_t * std::exp(-c.lambda * m_j_t) * (running - prev);
      prev = running;
    }
    const double q = c.cprime / std::pow(s.eta(j), 1.0 - c.c2) * inner;
    acc += std::exp(-2.0 * c.c1 * m_j_tm1) + q * q;
  }
  return acc;
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("averaging-matrix ledger: constant-step closed form") {
  // Constant eta on scalar curvature a: B_j^t sums a geometric series, so
  // W_j^t = B_j^t - 1/a = -(1/a)(1 - eta a)^{t-j} exactly.
  const double eta = 0.5, a = 1.0;
  const int t = 12;
  const auto ledger =
      bounds::w_ledger(SpdMatrix::identity(1), StepSchedule(eta, 0.0), t);
  CHECK(ledger.horizon() == t);
  CHECK(ledger.dim() == 1);
  double sum_expected = 0.0;
  for (int j = 1; j < t; ++j) {
    const double w = std::pow(1.0 - eta * a, t - j) / a;
    CHECK(ledger.w_norm(j) == doctest::Approx(w).epsilon(1e-12));
    CHECK(ledger.w(j)(0, 0) == doctest::Approx(-w).epsilon(1e-12));
    CHECK(ledger.b(j)(0, 0) ==
          doctest::Approx(1.0 / a - w).epsilon(1e-12));
    sum_expected += w * w;
  }
  CHECK(ledger.sum_w2() == doctest::Approx(sum_expected).epsilon(1e-12));
  CHECK(ledger.mean_w2() ==
        doctest::Approx(sum_expected / t).epsilon(1e-12));
  CHECK(ledger.validation_error() < 1e-10);
}

TEST_CASE("averaging-matrix ledger: frozen decaying-step values") {
  const StepSchedule s(0.5, 0.5);
  const auto lg100 = bounds::w_ledger(SpdMatrix::identity(1), s, 100);
  CHECK(lg100.mean_w2() ==
        doctest::Approx(0.126983876105225).epsilon(1e-12));
  CHECK(lg100.sum_w2() == doctest::Approx(12.6983876105225).epsilon(1e-12));
  CHECK(lg100.k2() == doctest::Approx(2.0990471581237).epsilon(1e-12));
  CHECK(lg100.validation_error() < 1e-10);

  const auto lg1000 = bounds::w_ledger(SpdMatrix::identity(1), s, 1000);
  CHECK(lg1000.mean_w2() ==
        doctest::Approx(0.0370845854535983).epsilon(1e-12));

  // The exact averaged-deviation statistic decreases with the horizon.
  CHECK(lg1000.mean_w2() < lg100.mean_w2());

  CHECK_THROWS_AS(bounds::w_ledger(SpdMatrix::identity(1), s, 20001),
                  HorizonTooLarge);
}

TEST_CASE("spectral constants: frozen fits and provenance") {
  const SpdMatrix a1 = SpdMatrix::identity(1);
  const auto c5 = bounds::spectral_constants(a1, StepSchedule(0.5, 0.5));
  CHECK(c5.k == 1.0);
  CHECK(c5.c1 == 1.0);
  CHECK(c5.lambda == 1.0);
  CHECK(c5.c2 == 0.5);
  CHECK(c5.k2 == doctest::Approx(2.09996656401858).epsilon(1e-12));
  CHECK(c5.cprime == doctest::Approx(0.14596193327567).epsilon(1e-12));
  CHECK(c5.k_provenance == "spectral");
  CHECK(c5.k2_provenance == "fitted");
  CHECK(c5.cprime_provenance == "fitted");
  CHECK(c5.c2_provenance == "default");

  const auto c6 = bounds::spectral_constants(a1, StepSchedule(0.5, 0.6));
  CHECK(c6.k2 == doctest::Approx(2.73574223738895).epsilon(1e-12));
  CHECK(c6.cprime == doctest::Approx(0.184171625585222).epsilon(1e-12));
  const auto c75 = bounds::spectral_constants(a1, StepSchedule(0.5, 0.75));
  CHECK(c75.k2 == doctest::Approx(5.10523963321215).epsilon(1e-12));
  CHECK(c75.cprime == doctest::Approx(0.311312402354178).epsilon(1e-12));

  // Anisotropic curvature: decay rates follow lambda_min.
  const auto c2d = bounds::spectral_constants(diag12(), StepSchedule(0.5, 0.5));
  CHECK(c2d.c1 == 1.0);
  CHECK(c2d.lambda == 1.0);
  CHECK(c2d.cprime == doctest::Approx(0.146028029600981).epsilon(1e-12));

  // eta_1 lambda_max = 1.2 > 1 is rejected outright.
  CHECK_THROWS_AS(bounds::spectral_constants(diag12(), StepSchedule(0.6, 0.5)),
                  StepTooLarge);
}

TEST_CASE("decay-majorant sum: direct transcription and frozen values") {
  const StepSchedule s(0.5, 0.5);
  const auto consts = bounds::spectral_constants(SpdMatrix::identity(1), s);

  CHECK(bounds::rho(s, 1, consts).verbatim == 0.0);
  CHECK(bounds::rho(s, 1, consts).variant == 0.0);

  for (int t : {10, 100, 316}) {
    const auto r = bounds::rho(s, t, consts);
    const double direct = rho_direct(s, t, consts);
    CHECK(r.verbatim == doctest::Approx(direct).epsilon(1e-12));
    CHECK(r.variant > 0.0);
  }
  CHECK(bounds::rho(s, 100, consts).verbatim ==
        doctest::Approx(12.6983876105225).epsilon(1e-12));
  CHECK(bounds::rho(s, 100, consts).variant ==
        doctest::Approx(21.5533198048256).epsilon(1e-12));
  CHECK(bounds::rho(s, 316, consts).verbatim ==
        doctest::Approx(31.8059905323616).epsilon(1e-12));
  CHECK(bounds::rho(s, 1000, consts).verbatim ==
        doctest::Approx(84.9511393091809).epsilon(1e-12));
}

TEST_CASE("decay-majorant sum: per-horizon averages move with c3") {
  const SpdMatrix a1 = SpdMatrix::identity(1);
  // c3 = 0.5: the average rho/t decreases over the calibration horizons.
  {
    const StepSchedule s(0.5, 0.5);
    const auto c = bounds::spectral_constants(a1, s);
    const double r100 = bounds::rho(s, 100, c).verbatim / 100.0;
    const double r316 = bounds::rho(s, 316, c).verbatim / 316.0;
    const double r1000 = bounds::rho(s, 1000, c).verbatim / 1000.0;
    CHECK(r100 > r316);
    CHECK(r316 > r1000);
  }
  // c3 = 0.6: the same average increases (the fitted majorant grows faster
  // than t), even though the exact ledger average still decreases.
  {
    const StepSchedule s(0.5, 0.6);
    const auto c = bounds::spectral_constants(a1, s);
    const double r100 = bounds::rho(s, 100, c).verbatim / 100.0;
    const double r316 = bounds::rho(s, 316, c).verbatim / 316.0;
    const double r1000 = bounds::rho(s, 1000, c).verbatim / 1000.0;
    CHECK(r100 < r316);
    CHECK(r316 < r1000);
    const double e100 = bounds::w_ledger(a1, s, 100).mean_w2();
    const double e1000 = bounds::w_ledger(a1, s, 1000).mean_w2();
    CHECK(e100 > e1000);
  }
}

TEST_CASE("decay-majorant sum dominates the exact ledger where fitted") {
  const SpdMatrix a1 = SpdMatrix::identity(1);
  for (double c3 : {0.5, 0.6, 0.75}) {
    const StepSchedule s(0.5, c3);
    const auto c = bounds::spectral_constants(a1, s);
    double min_slack = 1e300;
    for (int t : {100, 316, 1000}) {
      const double exact = bounds::w_ledger(a1, s, t).sum_w2();
      const double majorant = c.k * bounds::rho(s, t, c).verbatim;
      CHECK(exact <= majorant * (1.0 + 1e-12));
      min_slack = std::min(min_slack, majorant - exact);
    }
    // C' is the smallest admissible constant: the fit is tight at one of
    // the calibration horizons.
    CHECK(std::abs(min_slack) < 1e-8);
  }
}

TEST_CASE("starting-residual moments") {
  Vector d0(2);
  d0 << 3.0, 4.0;
  const auto m = Delta0Moments::of(d0);
  CHECK(m.mean_norm == doctest::Approx(5.0));
  CHECK(m.mean_sq == doctest::Approx(25.0));
}

TEST_CASE("linear-engine bound: frozen values") {
  const StepSchedule s(0.5, 0.6);
  {
    const SpdMatrix a = SpdMatrix::identity(1);
    const auto noise = sgd::NoiseModel::gaussian(SpdMatrix::identity(1));
    const auto consts = bounds::spectral_constants(a, s);
    Vector d0(1);
    d0 << 1.0;
    const auto d0m = Delta0Moments::of(d0);
    const auto r100 = bounds::thm3_bound(a, noise, s, 100, cos1d(), d0m, consts);
    CHECK(r100.total == doctest::Approx(1.90803686300553).epsilon(1e-12));
    CHECK(r100.term1 == doctest::Approx(0.349479199210444).epsilon(1e-12));
    CHECK(r100.term2 == doctest::Approx(1.02798370007628).epsilon(1e-12));
    CHECK(r100.term3 == doctest::Approx(0.530573963718807).epsilon(1e-12));
    CHECK(r100.m3.value == doctest::Approx(1.59576912160573).epsilon(1e-12));
    CHECK(r100.kd == 1.0);
    CHECK(r100.rho_verbatim == doctest::Approx(23.120254014145).epsilon(1e-12));
    const auto r1k = bounds::thm3_bound(a, noise, s, 1000, cos1d(), d0m, consts);
    CHECK(r1k.total == doctest::Approx(1.2312926607381).epsilon(1e-12));
    const auto r10k = bounds::thm3_bound(a, noise, s, 10000, cos1d(), d0m, consts);
    CHECK(r10k.total == doctest::Approx(1.42952259888659).epsilon(1e-12));
  }
  {
    const SpdMatrix a = diag12();
    const auto noise = sgd::NoiseModel::gaussian(SpdMatrix::identity(2));
    const auto consts = bounds::spectral_constants(a, s);
    Vector d0(2);
    d0 << 1.0, 1.0;
    const auto d0m = Delta0Moments::of(d0);
    const auto r100 = bounds::thm3_bound(a, noise, s, 100, cos2d(), d0m, consts);
    CHECK(r100.total == doctest::Approx(7.43505057553103).epsilon(1e-12));
    CHECK(r100.term1 == doctest::Approx(4.91966933159045).epsilon(1e-12));
    CHECK(r100.m3.value == doctest::Approx(15.8843570527429).epsilon(1e-12));
    CHECK(r100.kd == 2.0);
    const auto r1k = bounds::thm3_bound(a, noise, s, 1000, cos2d(), d0m, consts);
    CHECK(r1k.total == doctest::Approx(3.42702164099804).epsilon(1e-12));
  }
}

TEST_CASE("linear-engine bound requires a Lipschitz test function") {
  const SpdMatrix a = SpdMatrix::identity(1);
  const auto noise = sgd::NoiseModel::gaussian(SpdMatrix::identity(1));
  const StepSchedule s(0.5, 0.6);
  const auto consts = bounds::spectral_constants(a, s);
  const auto q = testfn::TestFunction::quadratic(Matrix::Identity(1, 1));
  Vector d0(1);
  d0 << 1.0;
  CHECK_THROWS_AS(bounds::thm3_bound(a, noise, s, 100, q,
                                     Delta0Moments::of(d0), consts),
                  InvalidSmoothness);
}

TEST_CASE("quadratic-minimization envelope: hand-checked instance") {
  // alpha = beta = gamma = 1, d = 1, t = 4, m1 = m2 = 1, K4 = K5 = 1:
  //   (3pi/4)/2 + 1*sqrt(1/4) + 1*1/4 = 3pi/8 + 0.75.
  const auto r = bounds::cor4_bound(1.0, 1.0, 1.0, 1, 4, cos1d(), 1.0, 1.0);
  CHECK(r.term1 ==
        doctest::Approx(3.0 * std::numbers::pi / 8.0).epsilon(1e-14));
  CHECK(r.term2 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.term3 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.total == doctest::Approx(3.0 * std::numbers::pi / 8.0 + 0.75)
                       .epsilon(1e-14));
}

TEST_CASE("smooth-objective bound: frozen quadratic catalog") {
  const StepSchedule s(0.5, 0.6);
  {
    const auto p = SgdProblem::quadratic(
        SpdMatrix::identity(1), Vector::Zero(1),
        NoiseModel::gaussian(SpdMatrix::identity(1)));
    const auto consts = bounds::spectral_constants(p.hessian_at_min(), s);
    Vector d0(1);
    d0 << 1.0;
    const auto d0m = Delta0Moments::of(d0);
    const auto r100 = bounds::thm4_bound(p, s, 100, cos1d(), d0m, consts);
    CHECK(r100.total == doctest::Approx(2.17332384486).epsilon(1e-9));
    CHECK(r100.term1 == doctest::Approx(0.34947919921).epsilon(1e-9));
    CHECK(r100.term2 == doctest::Approx(1.02798370008).epsilon(1e-9));
    CHECK(r100.term3 == doctest::Approx(0.795860945578).epsilon(1e-9));
    CHECK(r100.printed_total ==
          doctest::Approx(0.0138542150874).epsilon(1e-9));
    // Quadratic objectives have no third-derivative carry terms.
    CHECK(r100.lh_term2 == 0.0);
    CHECK(r100.lh_term3 == 0.0);
    CHECK(r100.first_term_provenance == "closed_form");

    const auto r1k = bounds::thm4_bound(p, s, 1000, cos1d(), d0m, consts);
    CHECK(r1k.total == doctest::Approx(1.41332035502).epsilon(1e-9));
    const auto r10k = bounds::thm4_bound(p, s, 10000, cos1d(), d0m, consts);
    CHECK(r10k.total == doctest::Approx(1.71888128498).epsilon(1e-9));
    CHECK(r10k.printed_total ==
          doctest::Approx(8.50892034301e-05).epsilon(1e-9));

    // For quadratic objectives the first term coincides exactly with the
    // linear engine's first term (same standardization, same noise).
    const auto lin = bounds::thm3_bound(p.quadratic_matrix(), p.noise(), s,
                                        100, cos1d(), d0m, consts);
    CHECK(r100.term1 == doctest::Approx(lin.term1).epsilon(1e-14));
  }
  {
    const auto p = SgdProblem::quadratic(
        diag12(), Vector::Zero(2),
        NoiseModel::gaussian(SpdMatrix::identity(2)));
    const auto consts = bounds::spectral_constants(p.hessian_at_min(), s);
    Vector d0(2);
    d0 << 1.0, 1.0;
    const auto d0m = Delta0Moments::of(d0);
    const auto r100 = bounds::thm4_bound(p, s, 100, cos2d(), d0m, consts);
    CHECK(r100.total == doctest::Approx(14.1960489533).epsilon(1e-9));
    CHECK(r100.m3.value == doctest::Approx(15.8843570527).epsilon(1e-9));
    const auto r10k = bounds::thm4_bound(p, s, 10000, cos2d(), d0m, consts);
    CHECK(r10k.total == doctest::Approx(9.78147975239).epsilon(1e-9));
  }
}

TEST_CASE("smooth-objective bound: frozen nonlinear instance") {
  Matrix design(4, 2);
  design << 1.0, 0.0, 0.0, 1.0, 0.8, 0.6, -0.6, 0.8;
  Vector targets(4);
  targets << 0.4, -0.3, 0.5, 0.2;
  const auto p = SgdProblem::logcosh_ridge(
      design, targets, 0.1,
      NoiseModel::gaussian(SpdMatrix{0.25 * Matrix::Identity(2, 2)}));
  const StepSchedule s(0.5, 0.6);
  const auto consts = bounds::spectral_constants(p.hessian_at_min(), s);
  CHECK(consts.k2 == doctest::Approx(8.27955806179).epsilon(1e-9));
  CHECK(consts.cprime == doctest::Approx(0.233370306881).epsilon(1e-9));

  Vector d0(2);
  d0 << 1.0, 1.0;
  const auto r = bounds::thm4_bound(p, s, 10000, cos2d(),
                                    Delta0Moments::of(d0), consts);
  CHECK(r.total == doctest::Approx(32.3191201972).epsilon(1e-9));
  CHECK(r.term1 == doctest::Approx(0.0224326404938).epsilon(1e-9));
  CHECK(r.lh_term2 == doctest::Approx(1095.97035379).epsilon(1e-9));
  CHECK(r.lh_term3 == doctest::Approx(144.551319458).epsilon(1e-9));
  CHECK(r.m3.value == doctest::Approx(0.6781504887).epsilon(1e-9));
  CHECK(r.printed_total == doctest::Approx(0.00280199608121).epsilon(1e-9));

  // Unit-norm directions share m1/m2, so the bound matches across them.
  Vector e1(2);
  e1 << 1.0, 0.0;
  const auto r_e1 =
      bounds::thm4_bound(p, s, 10000, testfn::TestFunction::cosine(e1),
                         Delta0Moments::of(d0), consts);
  CHECK(r_e1.total == doctest::Approx(r.total).epsilon(1e-14));
}

TEST_CASE("smooth-objective bound rejects degenerate inputs") {
  const StepSchedule s(0.5, 0.6);
  const auto consts = bounds::spectral_constants(SpdMatrix::identity(1), s);
  const auto zero_noise = SgdProblem::quadratic(
      SpdMatrix::identity(1), Vector::Zero(1), NoiseModel::zero(1));
  Vector d0(1);
  d0 << 1.0;
  CHECK_THROWS_AS(bounds::thm4_bound(zero_noise, s, 100, cos1d(),
                                     Delta0Moments::of(d0), consts),
                  SingularTail);
  // Unvalidated constants are rejected before anything is computed.
  CHECK_THROWS_AS(bounds::thm4_bound(zero_noise, s, 100, cos1d(),
                                     Delta0Moments::of(d0), BoundConstants{}),
                  ConfigError);

  const auto p = SgdProblem::quadratic(
      SpdMatrix::identity(1), Vector::Zero(1),
      NoiseModel::gaussian(SpdMatrix::identity(1)));
  const auto q = testfn::TestFunction::quadratic(Matrix::Identity(1, 1));
  CHECK_THROWS_AS(bounds::thm4_bound(p, s, 100, q, Delta0Moments::of(d0),
                                     consts),
                  InvalidSmoothness);
}

TEST_CASE("first-term cross-check by simulation") {
  const auto p = SgdProblem::quadratic(
      SpdMatrix::identity(1), Vector::Zero(1),
      NoiseModel::gaussian(SpdMatrix::identity(1)));
  const StepSchedule s(0.5, 0.6);
  const auto consts = bounds::spectral_constants(SpdMatrix::identity(1), s);
  Vector d0(1);
  d0 << 1.0;
  const auto exact =
      bounds::thm4_bound(p, s, 100, cos1d(), Delta0Moments::of(d0), consts);
  const auto mc = bounds::thm4_first_term_mc(p, 100, cos1d(), 4000, 11);
  CHECK(mc.provenance == "monte_carlo");
  CHECK(mc.stderr_value > 0.0);
  CHECK(std::abs(mc.value - exact.term1) < 4.0 * mc.stderr_value);

  CHECK_THROWS_AS(bounds::thm4_first_term_mc(p, 100, cos1d(), 1, 11),
                  ConfigError);
}

}  // TEST_SUITE
