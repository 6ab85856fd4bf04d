#include "mcltsgd/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mcltsgd/bounds.hpp"
#include "mcltsgd/csv.hpp"
#include "mcltsgd/errors.hpp"
#include "mcltsgd/montecarlo.hpp"
#include "mcltsgd/version.hpp"

namespace mcltsgd::experiment {

using linalg::Matrix;
using linalg::SpdMatrix;
using linalg::Vector;
using nlohmann::json;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string ts(long value) { return std::to_string(value); }
std::string ts_u64(std::uint64_t value) { return std::to_string(value); }
std::string fd(double value) { return io::format_double(value); }

// Distinct deterministic seed per grid row so certification rows use
// independent randomness (sweeps intentionally reuse the master seed).
std::uint64_t row_seed(std::uint64_t master, std::size_t index) {
  return master + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index);
}

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw ConfigError(context + ": " + what);
}

void expect_keys(const json& obj, const std::string& context,
                 const std::vector<std::string>& required,
                 const std::vector<std::string>& optional) {
  if (!obj.is_object()) fail(context, "expected an object");
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    const bool known =
        std::find(required.begin(), required.end(), key) != required.end() ||
        std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) fail(context, "unknown key '" + key + "'");
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) fail(context, "missing required key '" + key + "'");
  }
}

const json& require_member(const json& obj, const std::string& context,
                           const char* key) {
  if (!obj.contains(key)) fail(context, std::string("missing key '") + key + "'");
  return obj.at(key);
}

std::string get_string(const json& obj, const std::string& context,
                       const char* key) {
  const json& v = require_member(obj, context, key);
  if (!v.is_string()) fail(context, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

double get_double(const json& obj, const std::string& context,
                  const char* key) {
  const json& v = require_member(obj, context, key);
  if (!v.is_number()) fail(context, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

long get_integer(const json& obj, const std::string& context,
                 const char* key) {
  const json& v = require_member(obj, context, key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    fail(context, std::string("'") + key + "' must be an integer");
  }
  return static_cast<long>(v.get<long long>());
}

std::uint64_t get_seed(const json& obj, const std::string& context,
                       const char* key) {
  const json& v = require_member(obj, context, key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v.get<long long>());
  }
  fail(context, std::string("'") + key + "' must be a nonnegative integer");
}

Vector json_vector(const json& v, const std::string& context) {
  if (!v.is_array() || v.empty()) fail(context, "expected a nonempty array");
  Vector out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(context, "array entries must be numbers");
    out(static_cast<int>(i)) = v[i].get<double>();
  }
  return out;
}

Matrix json_matrix(const json& v, const std::string& context) {
  if (!v.is_array() || v.empty()) fail(context, "expected an array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  Matrix out;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!v[r].is_array() || v[r].empty()) {
      fail(context, "rows must be nonempty arrays");
    }
    if (r == 0) {
      cols = v[r].size();
      out.resize(static_cast<int>(rows), static_cast<int>(cols));
    } else if (v[r].size() != cols) {
      fail(context, "rows have inconsistent lengths");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[r][c].is_number()) fail(context, "entries must be numbers");
      out(static_cast<int>(r), static_cast<int>(c)) = v[r][c].get<double>();
    }
  }
  return out;
}

std::vector<int> parse_grid(const json& obj, const std::string& context,
                            const char* single_key, const char* list_key,
                            int min_value) {
  const bool has_single = obj.contains(single_key);
  const bool has_list = obj.contains(list_key);
  if (has_single == has_list) {
    fail(context, std::string("exactly one of '") + single_key + "'/'" +
                      list_key + "' is required");
  }
  std::vector<int> out;
  if (has_single) {
    out.push_back(static_cast<int>(get_integer(obj, context, single_key)));
  } else {
    const json& list = obj.at(list_key);
    if (!list.is_array() || list.empty()) {
      fail(context, std::string("'") + list_key + "' must be a nonempty array");
    }
    for (const auto& v : list) {
      if (!v.is_number_integer() && !v.is_number_unsigned()) {
        fail(context, std::string("'") + list_key + "' entries must be integers");
      }
      out.push_back(static_cast<int>(v.get<long long>()));
    }
  }
  for (const int v : out) {
    if (v < min_value) {
      fail(context, std::string("'") + (has_single ? single_key : list_key) +
                        "' entries must be >= " + std::to_string(min_value));
    }
  }
  return out;
}

void check_identifier(const std::string& id, const std::string& context) {
  if (id.empty()) fail(context, "must be nonempty");
  for (const char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) fail(context, "'" + id + "' may only use [A-Za-z0-9._-]");
  }
}

sgd::NoiseModel parse_noise(const json& obj, const std::string& context,
                            int dim) {
  expect_keys(obj, context, {"kind"}, {"covariance", "cov_diag", "scale"});
  const std::string kind = get_string(obj, context, "kind");
  const int specs = (obj.contains("covariance") ? 1 : 0) +
                    (obj.contains("cov_diag") ? 1 : 0) +
                    (obj.contains("scale") ? 1 : 0);
  if (kind == "zero") {
    if (specs != 0) fail(context, "zero noise takes no covariance keys");
    return sgd::NoiseModel::zero(dim);
  }
  if (kind != "gaussian" && kind != "scaled_rademacher") {
    fail(context, "kind must be zero|gaussian|scaled_rademacher");
  }
  if (specs != 1) {
    fail(context, "exactly one of covariance|cov_diag|scale is required");
  }
  Matrix v;
  if (obj.contains("covariance")) {
    v = json_matrix(obj.at("covariance"), context + ".covariance");
    if (v.rows() != dim || v.cols() != dim) {
      fail(context, "covariance must be " + std::to_string(dim) + "x" +
                        std::to_string(dim));
    }
  } else if (obj.contains("cov_diag")) {
    const Vector diag = json_vector(obj.at("cov_diag"), context + ".cov_diag");
    if (diag.size() != dim) {
      fail(context, "cov_diag must have length " + std::to_string(dim));
    }
    v = diag.asDiagonal();
  } else {
    const double scale = get_double(obj, context, "scale");
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      fail(context, "scale must be positive and finite");
    }
    v = scale * Matrix::Identity(dim, dim);
  }
  const SpdMatrix spd(v);
  return kind == "gaussian" ? sgd::NoiseModel::gaussian(spd)
                            : sgd::NoiseModel::scaled_rademacher(spd);
}

FunctionSpec parse_function(const json& obj) {
  const std::string context = "function";
  expect_keys(obj, context, {"family"},
              {"direction", "direction_pattern", "q", "q_pattern", "scale"});
  FunctionSpec spec;
  const std::string family = get_string(obj, context, "family");
  if (family == "cosine") {
    spec.family = testfn::Family::kCosine;
  } else if (family == "quadratic") {
    spec.family = testfn::Family::kQuadratic;
  } else if (family == "softplus_radial") {
    spec.family = testfn::Family::kSoftplusRadial;
  } else {
    fail(context, "family must be cosine|quadratic|softplus_radial");
  }
  if (obj.contains("scale")) {
    spec.scale = get_double(obj, context, "scale");
    if (!std::isfinite(spec.scale) || spec.scale == 0.0) {
      fail(context, "scale must be finite and nonzero");
    }
  }
  if (spec.family == testfn::Family::kQuadratic) {
    if (obj.contains("direction") || obj.contains("direction_pattern")) {
      fail(context, "the quadratic family takes q|q_pattern, not directions");
    }
    const bool has_q = obj.contains("q");
    const bool has_pattern = obj.contains("q_pattern");
    if (has_q == has_pattern) {
      fail(context, "exactly one of q|q_pattern is required");
    }
    if (has_pattern) {
      spec.pattern = get_string(obj, context, "q_pattern");
      if (spec.pattern != "identity") fail(context, "q_pattern must be identity");
    } else {
      spec.pattern = "explicit";
      spec.q = json_matrix(obj.at("q"), context + ".q");
      if (spec.q.rows() != spec.q.cols()) fail(context, "q must be square");
    }
    return spec;
  }
  if (obj.contains("q") || obj.contains("q_pattern")) {
    fail(context, "ridge families take direction|direction_pattern, not q");
  }
  const bool has_dir = obj.contains("direction");
  const bool has_pattern = obj.contains("direction_pattern");
  if (has_dir == has_pattern) {
    fail(context, "exactly one of direction|direction_pattern is required");
  }
  if (has_pattern) {
    spec.pattern = get_string(obj, context, "direction_pattern");
    if (spec.pattern != "e1" && spec.pattern != "ones" &&
        spec.pattern != "ones_unit") {
      fail(context, "direction_pattern must be e1|ones|ones_unit");
    }
  } else {
    spec.pattern = "explicit";
    spec.direction = json_vector(obj.at("direction"), context + ".direction");
  }
  return spec;
}

MartingaleSpec parse_martingale(const json& obj) {
  const std::string context = "martingale";
  expect_keys(obj, context, {"kind"},
              {"dim", "dims", "horizon", "horizons", "sigmas", "scales"});
  MartingaleSpec spec;
  spec.kind = martingale::kind_from_string(get_string(obj, context, "kind"));
  spec.dims = parse_grid(obj, context, "dim", "dims", 1);
  spec.horizons = parse_grid(obj, context, "horizon", "horizons", 1);
  const bool varying = spec.kind == martingale::Kind::kDeterministicVarying;
  const bool has_sigmas = obj.contains("sigmas");
  const bool has_scales = obj.contains("scales");
  if (!varying) {
    if (has_sigmas || has_scales) {
      fail(context, "sigmas/scales apply only to deterministic_varying");
    }
    return spec;
  }
  if (spec.dims.size() != 1 || spec.horizons.size() != 1) {
    fail(context, "deterministic_varying takes a single dim and horizon");
  }
  if (has_sigmas == has_scales) {
    fail(context, "deterministic_varying needs exactly one of sigmas|scales");
  }
  const int d = spec.dims.front();
  const int n = spec.horizons.front();
  if (has_sigmas) {
    spec.sigmas = json_matrix(obj.at("sigmas"), context + ".sigmas");
    if (spec.sigmas.rows() != n || spec.sigmas.cols() != d) {
      fail(context, "sigmas must be horizon x dim (" + std::to_string(n) +
                        "x" + std::to_string(d) + ")");
    }
  } else {
    const Vector scales = json_vector(obj.at("scales"), context + ".scales");
    if (scales.size() != n) {
      fail(context, "scales must have length horizon = " + std::to_string(n));
    }
    spec.sigmas = scales * Matrix::Ones(1, d);
  }
  if (!(spec.sigmas.array() > 0.0).all()) {
    fail(context, "per-step scales must be positive");
  }
  return spec;
}

LinearSpec parse_linear(const json& obj) {
  const std::string context = "linear";
  expect_keys(obj, context, {"delta0", "noise"},
              {"a", "a_diag", "horizon", "horizons"});
  const bool has_a = obj.contains("a");
  const bool has_diag = obj.contains("a_diag");
  if (has_a == has_diag) {
    fail(context, "exactly one of a|a_diag is required");
  }
  Matrix am;
  if (has_a) {
    am = json_matrix(obj.at("a"), context + ".a");
  } else {
    const Vector diag = json_vector(obj.at("a_diag"), context + ".a_diag");
    am = Matrix(diag.asDiagonal());
  }
  LinearSpec spec;
  spec.a = SpdMatrix(am);
  const int d = spec.a.dim();
  spec.delta0 = json_vector(obj.at("delta0"), context + ".delta0");
  if (spec.delta0.size() != d) {
    fail(context, "delta0 must have length " + std::to_string(d));
  }
  spec.horizons = parse_grid(obj, context, "horizon", "horizons", 1);
  spec.noise = parse_noise(require_member(obj, context, "noise"),
                           context + ".noise", d);
  return spec;
}

SgdSpec parse_sgd(const json& obj) {
  const std::string context = "sgd";
  expect_keys(obj, context, {"problem", "noise"},
              {"a", "a_diag", "b", "design", "targets", "ridge", "theta0",
               "theta0_offset", "horizon", "horizons"});
  SgdSpec spec;
  const std::string problem = get_string(obj, context, "problem");
  int d = 0;
  if (problem == "quadratic") {
    for (const char* key : {"design", "targets", "ridge"}) {
      if (obj.contains(key)) {
        fail(context, std::string("'") + key + "' applies only to logcosh_ridge");
      }
    }
    const bool has_a = obj.contains("a");
    const bool has_diag = obj.contains("a_diag");
    if (has_a == has_diag) fail(context, "exactly one of a|a_diag is required");
    Matrix am;
    if (has_a) {
      am = json_matrix(obj.at("a"), context + ".a");
    } else {
      const Vector diag = json_vector(obj.at("a_diag"), context + ".a_diag");
      am = Matrix(diag.asDiagonal());
    }
    const SpdMatrix a(am);
    d = a.dim();
    Vector b = Vector::Zero(d);
    if (obj.contains("b")) {
      b = json_vector(obj.at("b"), context + ".b");
      if (b.size() != d) fail(context, "b must have length " + std::to_string(d));
    }
    const sgd::NoiseModel noise =
        parse_noise(require_member(obj, context, "noise"), context + ".noise", d);
    spec.problem = sgd::SgdProblem::quadratic(a, b, noise);
  } else if (problem == "logcosh_ridge") {
    for (const char* key : {"a", "a_diag", "b"}) {
      if (obj.contains(key)) {
        fail(context, std::string("'") + key + "' applies only to quadratic");
      }
    }
    const Matrix design =
        json_matrix(require_member(obj, context, "design"), context + ".design");
    d = static_cast<int>(design.cols());
    const Vector targets =
        json_vector(require_member(obj, context, "targets"), context + ".targets");
    if (targets.size() != design.rows()) {
      fail(context, "targets must have one entry per design row");
    }
    const double ridge = get_double(obj, context, "ridge");
    if (!(ridge > 0.0) || !std::isfinite(ridge)) {
      fail(context, "ridge must be positive and finite");
    }
    const sgd::NoiseModel noise =
        parse_noise(require_member(obj, context, "noise"), context + ".noise", d);
    spec.problem = sgd::SgdProblem::logcosh_ridge(design, targets, ridge, noise);
  } else {
    fail(context, "problem must be quadratic|logcosh_ridge");
  }
  const bool has_abs = obj.contains("theta0");
  const bool has_offset = obj.contains("theta0_offset");
  if (has_abs == has_offset) {
    fail(context, "exactly one of theta0|theta0_offset is required");
  }
  if (has_abs) {
    spec.theta0 = json_vector(obj.at("theta0"), context + ".theta0");
  } else {
    const Vector offset =
        json_vector(obj.at("theta0_offset"), context + ".theta0_offset");
    if (offset.size() != d) {
      fail(context, "theta0_offset must have length " + std::to_string(d));
    }
    spec.theta0 = spec.problem->theta_star() + offset;
  }
  if (spec.theta0.size() != d) {
    fail(context, "theta0 must have length " + std::to_string(d));
  }
  spec.horizons = parse_grid(obj, context, "horizon", "horizons", 1);
  return spec;
}

ScheduleSpec parse_schedule(const json& obj) {
  const std::string context = "schedule";
  expect_keys(obj, context, {"eta0", "c3"}, {});
  ScheduleSpec spec;
  spec.eta0 = get_double(obj, context, "eta0");
  if (!(spec.eta0 > 0.0) || !std::isfinite(spec.eta0)) {
    fail(context, "eta0 must be positive and finite");
  }
  spec.c3 = get_double(obj, context, "c3");
  if (!(spec.c3 >= 0.0 && spec.c3 < 1.0)) {
    fail(context, "c3 = " + fd(spec.c3) +
                      " violates the constraint c3 in (0,1) (c3 = 0 is "
                      "additionally accepted for constant-step diagnostics)");
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Runners produce tables; artifact writing is shared.

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  bool all_certified = true;
};

std::vector<std::string> union_bound_names(
    const std::vector<mc::DiscrepancyReport>& reports) {
  std::vector<std::string> names;
  for (const auto& report : reports) {
    for (const auto& [name, value] : report.bound_values) {
      (void)value;
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        names.push_back(name);
      }
    }
  }
  return names;
}

double bound_or_nan(const mc::DiscrepancyReport& report,
                    const std::string& name) {
  for (const auto& [key, value] : report.bound_values) {
    if (key == name) return value;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Table discrepancy_table(const ExperimentConfig& cfg) {
  std::vector<mc::DiscrepancyReport> reports;
  if (cfg.engine == "martingale") {
    const MartingaleSpec& ms = *cfg.martingale;
    std::size_t idx = 0;
    for (const int d : ms.dims) {
      const testfn::TestFunction h = cfg.function->build(d);
      for (const int n : ms.horizons) {
        reports.push_back(mc::martingale_discrepancy(
            ms.build(d, n), h, cfg.replications, row_seed(cfg.seed, idx),
            cfg.threads, cfg.experiment));
        ++idx;
      }
    }
  } else if (cfg.engine == "linear") {
    const LinearSpec& ls = *cfg.linear;
    const sgd::StepSchedule schedule = cfg.schedule->build();
    const bounds::BoundConstants consts =
        bounds::spectral_constants(ls.a, schedule, cfg.calibration);
    const testfn::TestFunction h = cfg.function->build(ls.a.dim());
    std::size_t idx = 0;
    for (const int t : ls.horizons) {
      reports.push_back(mc::linear_discrepancy(
          ls.a, schedule, ls.delta0, t, ls.noise, h, cfg.replications,
          row_seed(cfg.seed, idx), consts, cfg.threads, cfg.experiment));
      ++idx;
    }
  } else {
    const SgdSpec& ss = *cfg.sgd;
    const sgd::SgdProblem& problem = *ss.problem;
    const sgd::StepSchedule schedule = cfg.schedule->build();
    const bounds::BoundConstants consts = bounds::spectral_constants(
        problem.hessian_at_min(), schedule, cfg.calibration);
    const testfn::TestFunction h = cfg.function->build(problem.dim());
    std::size_t idx = 0;
    for (const int t : ss.horizons) {
      reports.push_back(mc::sgd_discrepancy(
          problem, schedule, ss.theta0, t, h, cfg.replications,
          row_seed(cfg.seed, idx), consts, cfg.threads, cfg.experiment));
      ++idx;
    }
  }

  const bool printed = cfg.engine == "sgd";
  const std::vector<std::string> bound_names = union_bound_names(reports);
  Table out;
  out.columns = {"experiment", "engine", "d", "t_or_n", "function",
                 "gap",        "gap_stderr"};
  if (printed) {
    out.columns.push_back("printed_gap");
    out.columns.push_back("printed_gap_stderr");
  }
  for (const auto& name : bound_names) out.columns.push_back(name);
  out.columns.push_back("certified");
  out.columns.push_back("seed");
  for (const auto& report : reports) {
    std::vector<std::string> row = {report.experiment,
                                    report.engine,
                                    ts(report.dim),
                                    ts(report.t_or_n),
                                    report.function,
                                    fd(report.gap),
                                    fd(report.gap_stderr)};
    if (printed) {
      row.push_back(fd(report.printed_gap));
      row.push_back(fd(report.printed_gap_stderr));
    }
    for (const auto& name : bound_names) {
      row.push_back(fd(bound_or_nan(report, name)));
    }
    row.push_back(report.certified ? "true" : "false");
    row.push_back(ts_u64(report.seed));
    out.rows.push_back(std::move(row));
    out.all_certified = out.all_certified && report.certified;
  }
  return out;
}

Table mclt_table(const ExperimentConfig& cfg) {
  Table out;
  out.columns = {"model",      "d",    "n",    "function", "empirical_gap",
                 "gap_stderr", "thm1", "cor1", "cor2",     "p1_dev",
                 "seed"};
  const MartingaleSpec& ms = *cfg.martingale;
  std::size_t idx = 0;
  for (const int d : ms.dims) {
    const testfn::TestFunction h = cfg.function->build(d);
    for (const int n : ms.horizons) {
      const martingale::Model model = ms.build(d, n);
      const martingale::CovarianceLedger ledger(model);
      const double p1 =
          martingale::p1_deviation({ledger.p(1)}, ledger.sigma());
      const std::uint64_t seed = row_seed(cfg.seed, idx);
      const double cor1 = martingale::cor1_bound(model.alpha, model.beta,
                                                 model.gamma, d, n, h.m2());
      const double cor2 =
          h.m1() ? martingale::cor2_bound(*h.m1(), h.m2(), ledger.sigma(),
                                          0.0, model.delta, d, n)
                 : std::numeric_limits<double>::quiet_NaN();
      double gap = 0.0;
      double gap_stderr = 0.0;
      double thm1 = 0.0;
      bool certified = true;
      if (cfg.method == "enumerate") {
        const martingale::EnumerationResult res =
            martingale::enumerate_oracle(model, h);
        gap = res.exact_gap;
        thm1 = res.exact_bound;
        certified = gap <= thm1 && gap <= cor1 && (!h.m1() || gap <= cor2);
      } else {
        const mc::DiscrepancyReport report = mc::martingale_discrepancy(
            model, h, cfg.replications, seed, cfg.threads, cfg.experiment);
        gap = report.gap;
        gap_stderr = report.gap_stderr;
        thm1 = bound_or_nan(report, "thm1");
        certified = report.certified;
      }
      out.rows.push_back({model.name(), ts(d), ts(n), h.name(), fd(gap),
                          fd(gap_stderr), fd(thm1), fd(cor1), fd(cor2),
                          fd(p1), ts_u64(seed)});
      out.all_certified = out.all_certified && certified;
      ++idx;
    }
  }
  return out;
}

Table trajectories_table(const ExperimentConfig& cfg) {
  Table out;
  out.columns = {"rep", "t", "norm_delta", "norm_delta_bar"};
  const std::vector<int>& horizons =
      cfg.engine == "linear" ? cfg.linear->horizons : cfg.sgd->horizons;
  if (horizons.size() != 1) {
    fail("trajectories", "a single horizon is required");
  }
  const int t = horizons.front();
  const sgd::StepSchedule schedule = cfg.schedule->build();
  std::vector<sgd::Trajectory> trajectories(
      static_cast<std::size_t>(cfg.replications));
  if (cfg.engine == "linear") {
    const LinearSpec& ls = *cfg.linear;
    const Vector zero_b = Vector::Zero(ls.a.dim());
    mc::parallel_for(trajectories.size(), mc::resolve_threads(cfg.threads),
                     [&](std::size_t r) {
                       trajectories[r] =
                           sgd::run_linear(ls.a, zero_b, schedule, ls.delta0,
                                           t, ls.noise, cfg.seed, r);
                     });
  } else {
    const SgdSpec& ss = *cfg.sgd;
    mc::parallel_for(trajectories.size(), mc::resolve_threads(cfg.threads),
                     [&](std::size_t r) {
                       trajectories[r] = sgd::run_sgd(
                           *ss.problem, schedule, ss.theta0, t, cfg.seed, r);
                     });
  }
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    for (const sgd::Checkpoint& cp : trajectories[r].checkpoints) {
      out.rows.push_back({ts(static_cast<long>(r)), ts(cp.step),
                          fd(cp.norm_delta), fd(cp.norm_delta_bar)});
    }
  }
  return out;
}

Table bounds_table(const ExperimentConfig& cfg) {
  Table out;
  if (cfg.engine == "martingale") {
    out.columns = {"model", "d",    "n",    "function", "thm1",
                   "thm1_stderr", "cor1", "cor2", "p1_dev",   "seed"};
    const MartingaleSpec& ms = *cfg.martingale;
    std::size_t idx = 0;
    for (const int d : ms.dims) {
      const testfn::TestFunction h = cfg.function->build(d);
      for (const int n : ms.horizons) {
        const martingale::Model model = ms.build(d, n);
        const martingale::CovarianceLedger ledger(model);
        const std::uint64_t seed = row_seed(cfg.seed, idx);
        const martingale::BoundEstimate thm1 = martingale::thm1_bound(
            model, h, static_cast<int>(cfg.replications), seed);
        const double cor1 = martingale::cor1_bound(model.alpha, model.beta,
                                                   model.gamma, d, n, h.m2());
        const double cor2 =
            h.m1() ? martingale::cor2_bound(*h.m1(), h.m2(), ledger.sigma(),
                                            0.0, model.delta, d, n)
                   : std::numeric_limits<double>::quiet_NaN();
        const double p1 =
            martingale::p1_deviation({ledger.p(1)}, ledger.sigma());
        out.rows.push_back({model.name(), ts(d), ts(n), h.name(),
                            fd(thm1.value), fd(thm1.stderr_value), fd(cor1),
                            fd(cor2), fd(p1), ts_u64(seed)});
        ++idx;
      }
    }
    return out;
  }

  if (cfg.engine == "linear") {
    out.columns = {"d",  "t",  "function", "term1",        "term2",
                   "term3", "total", "m3", "m3_stderr", "m3_provenance",
                   "rho_verbatim", "rho_variant", "kd", "k", "k2",
                   "cprime", "c1", "c2", "lambda"};
    if (cfg.cor4) {
      for (const char* c : {"cor4_term1", "cor4_term2", "cor4_term3",
                            "cor4_total"}) {
        out.columns.push_back(c);
      }
    }
    out.columns.push_back("seed");
    const LinearSpec& ls = *cfg.linear;
    const sgd::StepSchedule schedule = cfg.schedule->build();
    const bounds::BoundConstants consts =
        bounds::spectral_constants(ls.a, schedule, cfg.calibration);
    const int d = ls.a.dim();
    const testfn::TestFunction h = cfg.function->build(d);
    const bounds::Delta0Moments d0 = bounds::Delta0Moments::of(ls.delta0);
    for (const int t : ls.horizons) {
      const bounds::Thm3Result res =
          bounds::thm3_bound(ls.a, ls.noise, schedule, t, h, d0, consts);
      std::vector<std::string> row = {
          ts(d),
          ts(t),
          h.name(),
          fd(res.term1),
          fd(res.term2),
          fd(res.term3),
          fd(res.total),
          fd(res.m3.value),
          fd(res.m3.stderr_value),
          res.m3.provenance,
          fd(res.rho_verbatim),
          fd(res.rho_variant),
          fd(res.kd),
          fd(consts.k),
          fd(consts.k2),
          fd(consts.cprime),
          fd(consts.c1),
          fd(consts.c2),
          fd(consts.lambda)};
      if (cfg.cor4) {
        const Matrix a_inv = ls.a.inverse();
        const SpdMatrix sandwich(a_inv * ls.noise.covariance() * a_inv);
        const double gamma =
            res.m3.value / std::pow(static_cast<double>(d), 1.5);
        const bounds::Cor4Result c4 = bounds::cor4_bound(
            sandwich.lambda_min(), sandwich.lambda_max(), gamma, d, t, h,
            cfg.cor4->k4, cfg.cor4->k5);
        row.push_back(fd(c4.term1));
        row.push_back(fd(c4.term2));
        row.push_back(fd(c4.term3));
        row.push_back(fd(c4.total));
      }
      row.push_back(ts_u64(cfg.seed));
      out.rows.push_back(std::move(row));
    }
    return out;
  }

  out.columns = {"d", "t", "function", "term1", "term2", "term3", "total",
                 "printed_term1", "printed_term2", "printed_term3",
                 "printed_total", "lh_term2", "lh_term3", "m3", "m3_stderr",
                 "m3_provenance", "rho_verbatim", "kd", "k", "k2", "cprime",
                 "c1", "c2", "lambda", "seed"};
  const SgdSpec& ss = *cfg.sgd;
  const sgd::SgdProblem& problem = *ss.problem;
  const sgd::StepSchedule schedule = cfg.schedule->build();
  const bounds::BoundConstants consts = bounds::spectral_constants(
      problem.hessian_at_min(), schedule, cfg.calibration);
  const int d = problem.dim();
  const testfn::TestFunction h = cfg.function->build(d);
  const bounds::Delta0Moments d0 =
      bounds::Delta0Moments::of(ss.theta0 - problem.theta_star());
  for (const int t : ss.horizons) {
    const bounds::Thm4Result res =
        bounds::thm4_bound(problem, schedule, t, h, d0, consts);
    out.rows.push_back({ts(d),
                        ts(t),
                        h.name(),
                        fd(res.term1),
                        fd(res.term2),
                        fd(res.term3),
                        fd(res.total),
                        fd(res.printed_term1),
                        fd(res.printed_term2),
                        fd(res.printed_term3),
                        fd(res.printed_total),
                        fd(res.lh_term2),
                        fd(res.lh_term3),
                        fd(res.m3.value),
                        fd(res.m3.stderr_value),
                        res.m3.provenance,
                        fd(res.rho_verbatim),
                        fd(res.kd),
                        fd(consts.k),
                        fd(consts.k2),
                        fd(consts.cprime),
                        fd(consts.c1),
                        fd(consts.c2),
                        fd(consts.lambda),
                        ts_u64(cfg.seed)});
  }
  return out;
}

Table covariance_table(const ExperimentConfig& cfg) {
  const LinearSpec& ls = *cfg.linear;
  if (ls.horizons.size() != 1) {
    fail("covariance", "a single horizon is required");
  }
  const int t = ls.horizons.front();
  const sgd::StepSchedule schedule = cfg.schedule->build();
  const std::vector<Vector> samples = mc::linear_scaled_averages(
      ls.a, schedule, ls.delta0, t, ls.noise, cfg.replications, cfg.seed,
      cfg.threads);
  const Matrix cov = mc::empirical_covariance(samples);
  const Matrix a_inv = ls.a.inverse();
  const Matrix limit = a_inv * ls.noise.covariance() * a_inv;
  const double fro = linalg::frobenius_norm(cov - limit);

  Table out;
  out.columns = {"d", "t", "replications", "fro_error"};
  std::vector<std::string> row = {ts(ls.a.dim()), ts(t),
                                  ts(cfg.replications), fd(fro)};
  if (cfg.tolerance) {
    const bool certified = fro <= *cfg.tolerance;
    out.columns.push_back("tolerance");
    out.columns.push_back("certified");
    row.push_back(fd(*cfg.tolerance));
    row.push_back(certified ? "true" : "false");
    out.all_certified = certified;
  }
  out.columns.push_back("seed");
  row.push_back(ts_u64(cfg.seed));
  out.rows.push_back(std::move(row));
  return out;
}

Table run_table(const ExperimentConfig& cfg) {
  if (cfg.type == "discrepancy") return discrepancy_table(cfg);
  if (cfg.type == "mclt") return mclt_table(cfg);
  if (cfg.type == "trajectories") return trajectories_table(cfg);
  if (cfg.type == "bounds") return bounds_table(cfg);
  if (cfg.type == "covariance") return covariance_table(cfg);
  fail("config", "unknown type '" + cfg.type + "'");
}

RunResult write_artifact(const ExperimentConfig& cfg, const Table& table,
                         const std::vector<std::string>& footers,
                         json extra_meta, double runtime_seconds) {
  RunResult result;
  result.artifact_path = cfg.output_path;
  result.meta_path = cfg.output_path + ".meta.json";
  result.rows = static_cast<long>(table.rows.size());
  result.all_certified = table.all_certified;
  result.exit_code = table.all_certified ? 0 : 2;

  if (cfg.output_format == "csv") {
    io::CsvWriter writer(table.columns);
    writer.add_comment(std::string("mclt_sgd ") + kVersion);
    writer.add_comment("experiment " + cfg.experiment);
    writer.add_comment("type " + cfg.type + " engine " + cfg.engine);
    writer.add_comment("config_hash " + io::hex64(cfg.config_hash));
    writer.add_comment("seed " + ts_u64(cfg.seed));
    for (const auto& row : table.rows) writer.add_row(row);
    for (const auto& footer : footers) writer.add_footer_comment(footer);
    writer.write(cfg.output_path);
  } else {
    json doc;
    doc["meta"] = {{"version", kVersion},
                   {"experiment", cfg.experiment},
                   {"type", cfg.type},
                   {"engine", cfg.engine},
                   {"config_hash", io::hex64(cfg.config_hash)},
                   {"seed", cfg.seed}};
    doc["columns"] = table.columns;
    doc["rows"] = table.rows;
    if (!footers.empty()) doc["footer"] = footers;
    io::write_text_atomic(cfg.output_path, doc.dump(2) + "\n");
  }

  json meta;
  meta["version"] = kVersion;
  meta["experiment"] = cfg.experiment;
  meta["type"] = cfg.type;
  meta["engine"] = cfg.engine;
  meta["config_hash"] = io::hex64(cfg.config_hash);
  meta["seed"] = cfg.seed;
  meta["replications"] = cfg.replications;
  meta["threads_requested"] = cfg.threads;
  meta["artifact"] = cfg.output_path;
  meta["rows"] = result.rows;
  meta["all_certified"] = table.all_certified;
  meta["runtime_seconds"] = runtime_seconds;
  for (auto& [key, value] : extra_meta.items()) meta[key] = value;
  io::write_text_atomic(result.meta_path, meta.dump(2) + "\n");

  char summary[256];
  std::snprintf(summary, sizeof(summary),
                "%s %s: %ld row%s, %s, wrote %s (%.2f s)", cfg.type.c_str(),
                cfg.engine.c_str(), result.rows, result.rows == 1 ? "" : "s",
                table.all_certified ? "all certified" : "CERTIFICATION FAILED",
                cfg.output_path.c_str(), runtime_seconds);
  result.message = summary;
  return result;
}

std::optional<double> parse_cell(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) return std::nullopt;
  return v;
}

}  // namespace

testfn::TestFunction FunctionSpec::build(int dim) const {
  if (family == testfn::Family::kQuadratic) {
    Matrix qq;
    if (pattern == "identity") {
      qq = scale * Matrix::Identity(dim, dim);
    } else {
      if (q.rows() != dim) {
        fail("function", "q is " + std::to_string(q.rows()) + "x" +
                             std::to_string(q.cols()) + " but dim = " +
                             std::to_string(dim));
      }
      qq = scale * q;
    }
    return testfn::TestFunction::quadratic(qq);
  }
  Vector a;
  if (pattern == "e1") {
    a = Vector::Zero(dim);
    a(0) = scale;
  } else if (pattern == "ones") {
    a = scale * Vector::Ones(dim);
  } else if (pattern == "ones_unit") {
    a = (scale / std::sqrt(static_cast<double>(dim))) * Vector::Ones(dim);
  } else {
    if (direction.size() != dim) {
      fail("function", "direction has length " +
                           std::to_string(direction.size()) + " but dim = " +
                           std::to_string(dim));
    }
    a = scale * direction;
  }
  return family == testfn::Family::kCosine
             ? testfn::TestFunction::cosine(a)
             : testfn::TestFunction::softplus_radial(a);
}

martingale::Model MartingaleSpec::build(int dim, int horizon) const {
  switch (kind) {
    case martingale::Kind::kIidRademacher:
      return martingale::Model::iid_rademacher(dim, horizon);
    case martingale::Kind::kIidGaussian:
      return martingale::Model::iid_gaussian(dim, horizon);
    case martingale::Kind::kSignHistory:
      return martingale::Model::sign_history(dim, horizon);
    case martingale::Kind::kDeterministicVarying:
      return martingale::Model::deterministic_varying(sigmas);
  }
  fail("martingale", "unknown kind");
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig cfg;
  cfg.schema_version =
      static_cast<int>(get_integer(j, "config", "schema_version"));
  if (cfg.schema_version != 1) {
    fail("config", "schema_version must be 1, got " +
                       std::to_string(cfg.schema_version));
  }
  cfg.experiment = get_string(j, "config", "experiment");
  check_identifier(cfg.experiment, "config.experiment");
  cfg.type = get_string(j, "config", "type");
  const bool known_type = cfg.type == "discrepancy" || cfg.type == "mclt" ||
                          cfg.type == "trajectories" || cfg.type == "bounds" ||
                          cfg.type == "covariance";
  if (!known_type) {
    fail("config",
         "type must be discrepancy|mclt|trajectories|bounds|covariance");
  }

  // Resolve the engine: explicit for the generic types, implied for the
  // engine-specific ones.
  if (j.contains("engine")) {
    cfg.engine = get_string(j, "config", "engine");
    if (cfg.engine != "martingale" && cfg.engine != "linear" &&
        cfg.engine != "sgd") {
      fail("config", "engine must be martingale|linear|sgd");
    }
  } else if (cfg.type == "mclt") {
    cfg.engine = "martingale";
  } else if (cfg.type == "covariance") {
    cfg.engine = "linear";
  } else {
    fail("config", "missing required key 'engine'");
  }
  if (cfg.type == "mclt" && cfg.engine != "martingale") {
    fail("config", "type mclt requires the martingale engine");
  }
  if (cfg.type == "covariance" && cfg.engine != "linear") {
    fail("config", "type covariance requires the linear engine");
  }
  if (cfg.type == "trajectories" && cfg.engine == "martingale") {
    fail("config", "type trajectories requires the linear or sgd engine");
  }

  const bool needs_function =
      cfg.type == "discrepancy" || cfg.type == "mclt" || cfg.type == "bounds";
  const bool needs_schedule = cfg.engine != "martingale";
  const bool reps_required = cfg.type != "bounds";

  std::vector<std::string> required = {"schema_version", "experiment", "type",
                                       "seed", "output", cfg.engine};
  std::vector<std::string> optional = {"engine", "threads"};
  (needs_function ? required : optional).push_back("function");
  (needs_schedule ? required : optional).push_back("schedule");
  (reps_required ? required : optional).push_back("replications");
  if (!needs_function && j.contains("function")) {
    fail("config", "'function' does not apply to type " + cfg.type);
  }
  if (!needs_schedule && j.contains("schedule")) {
    fail("config", "'schedule' does not apply to the martingale engine");
  }
  if (cfg.type == "mclt") optional.push_back("method");
  if (cfg.engine != "martingale") optional.push_back("calibration");
  if (cfg.type == "covariance") optional.push_back("tolerance");
  if (cfg.type == "bounds" && cfg.engine == "linear") {
    optional.push_back("cor4");
  }
  expect_keys(j, "config", required, optional);

  cfg.seed = get_seed(j, "config", "seed");
  if (j.contains("replications")) {
    cfg.replications = get_integer(j, "config", "replications");
    const long min_reps = cfg.type == "covariance" ? 2 : 1;
    if (cfg.replications < min_reps) {
      fail("config", "replications must be >= " + std::to_string(min_reps));
    }
  } else {
    cfg.replications = 100000;  // bounds type: used only by thm1 estimation
  }
  if (j.contains("threads")) {
    cfg.threads = static_cast<int>(get_integer(j, "config", "threads"));
    if (cfg.threads < 0) fail("config", "threads must be >= 0");
  }
  if (j.contains("method")) {
    cfg.method = get_string(j, "config", "method");
    if (cfg.method != "monte_carlo" && cfg.method != "enumerate") {
      fail("config", "method must be monte_carlo|enumerate");
    }
  }
  if (j.contains("calibration")) {
    const json& cal = j.at("calibration");
    if (!cal.is_array() || cal.empty()) {
      fail("config", "calibration must be a nonempty integer array");
    }
    cfg.calibration.clear();
    for (const auto& v : cal) {
      if (!v.is_number_integer() && !v.is_number_unsigned()) {
        fail("config", "calibration entries must be integers");
      }
      const long t = v.get<long long>();
      if (t < 2 || t > 20000) {
        fail("config", "calibration horizons must lie in [2, 20000]");
      }
      cfg.calibration.push_back(static_cast<int>(t));
    }
  }
  if (j.contains("tolerance")) {
    const double tol = get_double(j, "config", "tolerance");
    if (!(tol > 0.0) || !std::isfinite(tol)) {
      fail("config", "tolerance must be positive and finite");
    }
    cfg.tolerance = tol;
  }
  if (j.contains("cor4")) {
    const json& c4 = j.at("cor4");
    expect_keys(c4, "cor4", {"k4", "k5"}, {});
    Cor4Spec spec;
    spec.k4 = get_double(c4, "cor4", "k4");
    spec.k5 = get_double(c4, "cor4", "k5");
    if (!(spec.k4 >= 0.0) || !(spec.k5 >= 0.0)) {
      fail("cor4", "k4 and k5 must be nonnegative");
    }
    cfg.cor4 = spec;
  }

  const json& output = require_member(j, "config", "output");
  expect_keys(output, "output", {"path"}, {"format"});
  cfg.output_path = get_string(output, "output", "path");
  if (cfg.output_path.empty()) fail("output", "path must be nonempty");
  if (output.contains("format")) {
    cfg.output_format = get_string(output, "output", "format");
    if (cfg.output_format != "csv" && cfg.output_format != "json") {
      fail("output", "format must be csv|json");
    }
  }

  if (cfg.engine == "martingale") {
    cfg.martingale = parse_martingale(require_member(j, "config", "martingale"));
  } else if (cfg.engine == "linear") {
    cfg.linear = parse_linear(require_member(j, "config", "linear"));
  } else {
    cfg.sgd = parse_sgd(require_member(j, "config", "sgd"));
  }
  if (needs_schedule) {
    cfg.schedule = parse_schedule(require_member(j, "config", "schedule"));
  }
  if (needs_function) {
    cfg.function = parse_function(require_member(j, "config", "function"));
    // Fail fast on incompatible explicit dimensions.
    if (cfg.engine == "martingale") {
      for (const int d : cfg.martingale->dims) (void)cfg.function->build(d);
    } else if (cfg.engine == "linear") {
      (void)cfg.function->build(cfg.linear->a.dim());
    } else {
      (void)cfg.function->build(cfg.sgd->problem->dim());
    }
  }

  cfg.canonical_text = j.dump();
  cfg.config_hash = io::fnv1a(cfg.canonical_text);
  return cfg;
}

RunResult run_experiment(const ExperimentConfig& config) {
  const double t0 = now_seconds();
  const Table table = run_table(config);
  return write_artifact(config, table, {}, json::object(),
                        now_seconds() - t0);
}

RunResult run_sweep(const ExperimentConfig& base, const std::string& axis,
                    const std::vector<double>& values) {
  const bool known_axis = axis == "horizon" || axis == "dim" ||
                          axis == "reps" || axis == "eta0" || axis == "c3";
  if (!known_axis) {
    fail("sweep", "axis must be horizon|dim|reps|eta0|c3, got '" + axis + "'");
  }
  if (values.size() < 2) fail("sweep", "need at least two axis values");

  const json base_json = json::parse(base.canonical_text);
  const bool integral_axis =
      axis == "horizon" || axis == "dim" || axis == "reps";

  Table merged;
  merged.columns.push_back(axis);
  const double t0 = now_seconds();
  for (const double value : values) {
    json j = base_json;
    if (integral_axis && (!(value >= 1.0) || value != std::floor(value))) {
      fail("sweep", "axis '" + axis + "' needs integer values >= 1, got " +
                        fd(value));
    }
    if (axis == "horizon") {
      json& engine_block = j.at(base.engine);
      engine_block.erase("horizons");
      engine_block["horizon"] = static_cast<long>(value);
    } else if (axis == "dim") {
      if (base.engine != "martingale") {
        fail("sweep", "axis dim requires the martingale engine");
      }
      j.at("martingale").erase("dims");
      j.at("martingale")["dim"] = static_cast<long>(value);
    } else if (axis == "reps") {
      j["replications"] = static_cast<long>(value);
    } else {
      if (!j.contains("schedule")) {
        fail("sweep", "axis " + axis + " requires a schedule");
      }
      j.at("schedule")[axis] = value;
    }
    const ExperimentConfig sub = ExperimentConfig::parse_text(j.dump());
    const Table table = run_table(sub);
    if (table.rows.size() != 1) {
      fail("sweep", "base config must produce exactly one row per value, got " +
                        std::to_string(table.rows.size()));
    }
    if (merged.columns.size() == 1) {
      for (const auto& c : table.columns) merged.columns.push_back(c);
    } else if (!std::equal(merged.columns.begin() + 1, merged.columns.end(),
                           table.columns.begin(), table.columns.end())) {
      fail("sweep", "inner runs produced inconsistent columns");
    }
    std::vector<std::string> row;
    row.push_back(integral_axis ? ts(static_cast<long>(value)) : fd(value));
    for (const auto& cell : table.rows.front()) row.push_back(cell);
    merged.rows.push_back(std::move(row));
    merged.all_certified = merged.all_certified && table.all_certified;
  }

  // Log-log slopes of every positive numeric column against the axis.
  std::vector<std::string> footers;
  json slopes = json::object();
  const std::vector<std::string> skip = {
      "experiment", "engine", "model",  "function",     "certified",
      "seed",       "d",      "n",      "t",            "t_or_n",
      "rep",        "replications",     "m3_provenance", "tolerance",
      axis};
  bool positive_axis = true;
  for (const double v : values) positive_axis = positive_axis && v > 0.0;
  if (positive_axis) {
    for (std::size_t c = 1; c < merged.columns.size(); ++c) {
      const std::string& column = merged.columns[c];
      if (std::find(skip.begin(), skip.end(), column) != skip.end()) continue;
      std::vector<double> ys;
      bool usable = true;
      for (const auto& row : merged.rows) {
        const std::optional<double> v = parse_cell(row[c]);
        if (!v || !(*v > 0.0) || !std::isfinite(*v)) {
          usable = false;
          break;
        }
        ys.push_back(*v);
      }
      if (!usable) continue;
      SlopeFit fit;
      try {
        fit = loglog_fit(values, ys);
      } catch (const Error&) {
        continue;  // degenerate xs; nothing to report
      }
      footers.push_back("loglog_slope " + column + " " + fd(fit.slope) + " " +
                        fd(fit.stderr_value));
      slopes[column] = {{"slope", fit.slope}, {"stderr", fit.stderr_value}};
    }
  }

  json extra;
  extra["sweep"] = {{"axis", axis}, {"values", values}};
  if (!slopes.empty()) extra["slopes"] = slopes;
  return write_artifact(base, merged, footers, extra, now_seconds() - t0);
}

SlopeFit loglog_fit(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ConfigError("loglog_fit: need matching xs/ys with >= 2 points");
  }
  const std::size_t n = xs.size();
  std::vector<double> lx(n);
  std::vector<double> ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) ||
        !std::isfinite(ys[i])) {
      throw ConfigError("loglog_fit: coordinates must be positive and finite");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += lx[i];
    mean_y += ly[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mean_x) * (lx[i] - mean_x);
    sxy += (lx[i] - mean_x) * (ly[i] - mean_y);
  }
  if (sxx == 0.0) throw ConfigError("loglog_fit: xs must not all coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
      sse += r * r;
    }
    fit.stderr_value =
        std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

}  // namespace mcltsgd::experiment
