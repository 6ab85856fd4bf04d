// Command-line frontend: wires JSON experiment configs to the engines,
// bound evaluators, and the replication harness, and writes CSV/JSON
// artifacts. Exit codes: 0 success, 1 config/runtime error, 2 when some
// certification row failed.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcltsgd/csv.hpp"
#include "mcltsgd/errors.hpp"
#include "mcltsgd/experiment.hpp"
#include "mcltsgd/martingale.hpp"
#include "mcltsgd/stein.hpp"
#include "mcltsgd/test_functions.hpp"
#include "mcltsgd/version.hpp"

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

struct ConfigArgs {
  std::string config_path;
  long reps = 0;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  CLI::Option* reps_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void add_config_options(CLI::App* sub, ConfigArgs& args) {
  sub->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  args.reps_opt = sub->add_option("--reps", args.reps,
                                  "override the configured replications");
  args.seed_opt =
      sub->add_option("--seed", args.seed, "override the configured seed");
  args.out_opt =
      sub->add_option("--out", args.out, "override the output path");
  args.threads_opt = sub->add_option(
      "--threads", args.threads,
      "worker threads (0 = machine parallelism; env MCLT_SGD_THREADS)");
}

mcltsgd::experiment::ExperimentConfig load_config(
    const ConfigArgs& args, const std::string& expected_type,
    const std::string& expected_engine = "") {
  std::ifstream in(args.config_path, std::ios::binary);
  if (!in) {
    throw mcltsgd::ConfigError("cannot open config file " + args.config_path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw mcltsgd::ConfigError(std::string("config is not valid JSON: ") +
                               e.what());
  }
  if (!j.is_object()) {
    throw mcltsgd::ConfigError("config: top level must be an object");
  }
  if (args.reps_opt->count() > 0) j["replications"] = args.reps;
  if (args.seed_opt->count() > 0) j["seed"] = args.seed;
  if (args.threads_opt->count() > 0) j["threads"] = args.threads;
  if (args.out_opt->count() > 0) {
    if (!j.contains("output") || !j["output"].is_object()) {
      j["output"] = json::object();
    }
    j["output"]["path"] = args.out;
  }
  auto cfg = mcltsgd::experiment::ExperimentConfig::parse_text(j.dump());
  if (!expected_type.empty() && cfg.type != expected_type) {
    throw mcltsgd::ConfigError("this subcommand runs type '" + expected_type +
                               "' configs, got type '" + cfg.type + "'");
  }
  if (!expected_engine.empty() && cfg.engine != expected_engine) {
    throw mcltsgd::ConfigError("this subcommand runs engine '" +
                               expected_engine + "' configs, got engine '" +
                               cfg.engine + "'");
  }
  return cfg;
}

int report_result(const mcltsgd::experiment::RunResult& result) {
  std::cout << result.message << "\n";
  if (result.exit_code == 2) {
    std::cerr << "certification failed: some row violated its bound by more "
                 "than 3 standard errors (exit 2)\n";
  }
  return result.exit_code;
}

int run_config_type(const ConfigArgs& args, const std::string& type,
                    const std::string& engine = "") {
  const auto cfg = load_config(args, type, engine);
  return report_result(mcltsgd::experiment::run_experiment(cfg));
}

struct SteinArgs {
  int dim = 1;
  double cov_scale = 1.0;
  std::string family = "cosine";
  double scale = 1.0;
  double grid_lo = -3.0;
  double grid_hi = 3.0;
  double grid_step = 0.0;  // 0 = default per dimension
  double fd_step = 1e-3;
  std::string out;
};

int run_stein_check(const SteinArgs& args) {
  using mcltsgd::experiment::FunctionSpec;
  FunctionSpec spec;
  if (args.family == "cosine") {
    spec.family = mcltsgd::testfn::Family::kCosine;
    spec.pattern = "e1";
  } else if (args.family == "quadratic") {
    spec.family = mcltsgd::testfn::Family::kQuadratic;
    spec.pattern = "identity";
  } else if (args.family == "softplus_radial") {
    spec.family = mcltsgd::testfn::Family::kSoftplusRadial;
    spec.pattern = "e1";
  } else {
    throw mcltsgd::ConfigError(
        "--family must be cosine|quadratic|softplus_radial");
  }
  spec.scale = args.scale;
  const mcltsgd::testfn::TestFunction h = spec.build(args.dim);

  const mcltsgd::linalg::SpdMatrix sigma(
      args.cov_scale *
      mcltsgd::linalg::Matrix::Identity(args.dim, args.dim));
  const mcltsgd::stein::SteinSolution solution = mcltsgd::stein::stein_solve(
      h, mcltsgd::linalg::Vector::Zero(args.dim), sigma);

  const double step = args.grid_step > 0.0 ? args.grid_step
                      : args.dim == 1      ? 0.5
                                           : 1.0;
  const std::vector<mcltsgd::linalg::Vector> probes =
      mcltsgd::stein::make_probe_grid(args.dim, args.grid_lo, args.grid_hi,
                                      step);
  double max_residual = 0.0;
  for (const auto& x : probes) {
    max_residual = std::max(max_residual, std::abs(solution.residual(x)));
  }
  const double factor =
      mcltsgd::stein::stein_factor_estimate(solution, probes, args.fd_step);
  const double factor_bound = (kPi / 4.0) *
                              std::sqrt(static_cast<double>(args.dim)) *
                              h.m2() / std::sqrt(sigma.lambda_min());
  const double residual_tol = solution.options().residual_tol;
  const bool certified =
      max_residual <= residual_tol && factor <= factor_bound * 1.01;

  std::printf(
      "stein-check d=%d cov_scale=%g %s: max_residual %.3e (tol %.1e), "
      "hessian-lipschitz estimate %.6f <= bound %.6f: %s\n",
      args.dim, args.cov_scale, h.name().c_str(), max_residual, residual_tol,
      factor, factor_bound, certified ? "ok" : "VIOLATED");

  if (!args.out.empty()) {
    mcltsgd::io::CsvWriter writer({"d", "cov_scale", "function",
                                   "max_residual", "residual_tol",
                                   "factor_estimate", "factor_bound",
                                   "certified"});
    writer.add_comment(std::string("mclt_sgd ") + mcltsgd::kVersion);
    char desc[160];
    std::snprintf(desc, sizeof(desc),
                  "stein-check dim=%d cov_scale=%.17g family=%s scale=%.17g",
                  args.dim, args.cov_scale, args.family.c_str(), args.scale);
    writer.add_comment(desc);
    writer.add_comment("config_hash " +
                       mcltsgd::io::hex64(mcltsgd::io::fnv1a(desc)));
    writer.add_row({std::to_string(args.dim),
                    mcltsgd::io::format_double(args.cov_scale), h.name(),
                    mcltsgd::io::format_double(max_residual),
                    mcltsgd::io::format_double(residual_tol),
                    mcltsgd::io::format_double(factor),
                    mcltsgd::io::format_double(factor_bound),
                    certified ? "true" : "false"});
    writer.write(args.out);
    std::cout << "wrote " << args.out << "\n";
  }
  return certified ? 0 : 2;
}

int run_list_functions() {
  std::printf("%-16s %-22s %-10s %-10s\n", "family", "parameters", "m1",
              "m2");
  for (const auto& info : mcltsgd::testfn::family_catalog()) {
    std::printf("%-16s %-22s %-10s %-10s\n", info.name.c_str(),
                info.parameters.c_str(), info.m1.c_str(), info.m2.c_str());
  }
  std::printf("\nmartingale difference models:\n");
  for (const auto kind : {mcltsgd::martingale::Kind::kIidRademacher,
                          mcltsgd::martingale::Kind::kIidGaussian,
                          mcltsgd::martingale::Kind::kDeterministicVarying,
                          mcltsgd::martingale::Kind::kSignHistory}) {
    std::printf("  %s\n", mcltsgd::martingale::kind_name(kind).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("mclt-sgd ") + mcltsgd::kVersion +
               " - normal-approximation bounds for martingale sums and "
               "averaged SGD, with Monte Carlo certification"};
  app.require_subcommand(1);

  int exit_code = 0;

  ConfigArgs mclt_args;
  auto* mclt = app.add_subcommand(
      "mclt", "martingale-sum gaps with thm1/cor1/cor2 columns");
  add_config_options(mclt, mclt_args);
  mclt->callback([&] { exit_code = run_config_type(mclt_args, "mclt"); });

  ConfigArgs siml_args;
  auto* siml = app.add_subcommand(
      "simulate-linear", "record linear-recursion residual trajectories");
  add_config_options(siml, siml_args);
  siml->callback([&] {
    exit_code = run_config_type(siml_args, "trajectories", "linear");
  });

  ConfigArgs sims_args;
  auto* sims = app.add_subcommand(
      "simulate-sgd", "record stochastic-gradient residual trajectories");
  add_config_options(sims, sims_args);
  sims->callback([&] {
    exit_code = run_config_type(sims_args, "trajectories", "sgd");
  });

  ConfigArgs bounds_args;
  auto* boundscmd = app.add_subcommand(
      "bounds", "evaluate itemized bound terms over the configured grid");
  add_config_options(boundscmd, bounds_args);
  boundscmd->callback(
      [&] { exit_code = run_config_type(bounds_args, "bounds"); });

  ConfigArgs disc_args;
  auto* disc = app.add_subcommand(
      "discrepancy",
      "measure |E h(standardized) - E h(reference)| and certify bounds");
  add_config_options(disc, disc_args);
  disc->callback(
      [&] { exit_code = run_config_type(disc_args, "discrepancy"); });

  ConfigArgs cov_args;
  auto* cov = app.add_subcommand(
      "covariance",
      "empirical covariance of scaled averaged residuals vs the limit");
  add_config_options(cov, cov_args);
  cov->callback(
      [&] { exit_code = run_config_type(cov_args, "covariance"); });

  ConfigArgs sweep_args;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  auto* sweep = app.add_subcommand(
      "sweep", "rerun a config along an axis and fit log-log slopes");
  add_config_options(sweep, sweep_args);
  sweep->add_option("--axis", sweep_axis, "horizon|dim|reps|eta0|c3")
      ->required();
  sweep->add_option("--values", sweep_values, "comma-separated axis values")
      ->required()
      ->delimiter(',');
  sweep->callback([&] {
    const auto cfg = load_config(sweep_args, "");
    exit_code = report_result(
        mcltsgd::experiment::run_sweep(cfg, sweep_axis, sweep_values));
  });

  SteinArgs stein_args;
  auto* stein = app.add_subcommand(
      "stein-check",
      "residuals and Hessian-Lipschitz factor of the Gaussian-identity "
      "equation solver");
  stein->add_option("--dim", stein_args.dim, "dimension (1 or 2)")
      ->check(CLI::Range(1, 2));
  stein->add_option("--cov-scale", stein_args.cov_scale,
                    "Sigma = cov-scale * I")
      ->check(CLI::PositiveNumber);
  stein->add_option("--family", stein_args.family,
                    "cosine|quadratic|softplus_radial");
  stein->add_option("--scale", stein_args.scale,
                    "direction/form scale of the test function");
  stein->add_option("--grid-lo", stein_args.grid_lo, "probe grid lower edge");
  stein->add_option("--grid-hi", stein_args.grid_hi, "probe grid upper edge");
  stein->add_option("--grid-step", stein_args.grid_step,
                    "probe grid step (default 0.5 in 1-D, 1.0 in 2-D)");
  stein->add_option("--fd-step", stein_args.fd_step,
                    "finite-difference step for Hessian probes");
  stein->add_option("--out", stein_args.out, "optional CSV output path");
  stein->callback([&] { exit_code = run_stein_check(stein_args); });

  auto* list = app.add_subcommand(
      "list-functions", "catalog of test-function families and models");
  list->callback([&] { exit_code = run_list_functions(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const mcltsgd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
