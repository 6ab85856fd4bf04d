#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mcltsgd/errors.hpp"
#include "mcltsgd/experiment.hpp"
#include "mcltsgd/test_functions.hpp"

using namespace mcltsgd;
using experiment::ExperimentConfig;
using experiment::FunctionSpec;
using experiment::RunResult;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string enumerate_config(const std::string& out_path,
                             const std::string& horizons = "[2, 4]") {
  return std::string(R"({
    "schema_version": 1,
    "experiment": "unit-mclt",
    "type": "mclt",
    "method": "enumerate",
    "martingale": {"kind": "iid_rademacher", "dim": 1, "horizons": )") +
         horizons + R"(},
    "function": {"family": "cosine", "direction": [1.0]},
    "replications": 50,
    "seed": 1,
    "output": {"path": ")" +
         out_path + R"("}
  })";
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("parsing fills defaults and canonicalizes") {
  const auto cfg = ExperimentConfig::parse_text(enumerate_config("/tmp/x.csv"));
  CHECK(cfg.schema_version == 1);
  CHECK(cfg.experiment == "unit-mclt");
  CHECK(cfg.type == "mclt");
  CHECK(cfg.engine == "martingale");  // implied by the type
  CHECK(cfg.method == "enumerate");
  CHECK(cfg.threads == 0);
  CHECK(cfg.output_format == "csv");
  CHECK(cfg.calibration == std::vector<int>{100, 316, 1000});
  REQUIRE(cfg.martingale.has_value());
  CHECK(cfg.martingale->dims == std::vector<int>{1});
  CHECK(cfg.martingale->horizons == std::vector<int>{2, 4});
  CHECK(cfg.config_hash != 0);
  CHECK_FALSE(cfg.canonical_text.empty());
}

TEST_CASE("parsing rejects malformed documents") {
  CHECK_THROWS_AS(ExperimentConfig::parse_text("not json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("[1,2]"), ConfigError);

  // Unknown top-level key.
  std::string cfg = enumerate_config("/tmp/x.csv");
  cfg.insert(cfg.rfind('}'), R"(, "surprise": 1)");
  CHECK_THROWS_AS(ExperimentConfig::parse_text(cfg), ConfigError);

  // Missing seed.
  std::string no_seed = enumerate_config("/tmp/x.csv");
  no_seed.replace(no_seed.find("\"seed\": 1,"), 10, "");
  CHECK_THROWS_AS(ExperimentConfig::parse_text(no_seed), ConfigError);

  // Identifier charset.
  std::string bad_id = enumerate_config("/tmp/x.csv");
  bad_id.replace(bad_id.find("unit-mclt"), 9, "bad name!");
  CHECK_THROWS_AS(ExperimentConfig::parse_text(bad_id), ConfigError);
}

TEST_CASE("schedule validation reports the exact constraint") {
  const std::string cfg = R"({
    "schema_version": 1,
    "experiment": "unit-linear",
    "type": "discrepancy",
    "engine": "linear",
    "linear": {"a_diag": [1.0], "delta0": [1.0], "horizons": [10],
               "noise": {"kind": "gaussian", "cov_diag": [1.0]}},
    "schedule": {"eta0": 0.5, "c3": 1.5},
    "function": {"family": "cosine", "direction": [1.0]},
    "replications": 10,
    "seed": 1,
    "output": {"path": "/tmp/x.csv"}
  })";
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::parse_text(cfg),
      "schedule: c3 = 1.5 violates the constraint c3 in (0,1) (c3 = 0 is "
      "additionally accepted for constant-step diagnostics)",
      ConfigError);
}

TEST_CASE("covariance runs need enough replications for a sample moment") {
  const std::string cfg = R"({
    "schema_version": 1,
    "experiment": "unit-cov",
    "type": "covariance",
    "linear": {"a_diag": [1.0], "delta0": [1.0], "horizon": 10,
               "noise": {"kind": "gaussian", "cov_diag": [1.0]}},
    "schedule": {"eta0": 0.5, "c3": 0.5},
    "replications": 1,
    "seed": 1,
    "output": {"path": "/tmp/x.csv"}
  })";
  CHECK_THROWS_AS(ExperimentConfig::parse_text(cfg), ConfigError);
}

TEST_CASE("config fingerprints ignore key order but track content") {
  const std::string a = enumerate_config("/tmp/x.csv");
  // Same document with the top-level keys listed in another order.
  const std::string b = R"({
    "output": {"path": "/tmp/x.csv"},
    "seed": 1,
    "replications": 50,
    "function": {"family": "cosine", "direction": [1.0]},
    "martingale": {"kind": "iid_rademacher", "dim": 1, "horizons": [2, 4]},
    "method": "enumerate",
    "type": "mclt",
    "experiment": "unit-mclt",
    "schema_version": 1
  })";
  const auto ca = ExperimentConfig::parse_text(a);
  const auto cb = ExperimentConfig::parse_text(b);
  CHECK(ca.config_hash == cb.config_hash);
  CHECK(ca.canonical_text == cb.canonical_text);

  std::string c = a;
  c.replace(c.find("\"seed\": 1"), 9, "\"seed\": 2");
  CHECK(ExperimentConfig::parse_text(c).config_hash != ca.config_hash);
}

TEST_CASE("log-log regression: exact power laws and guards") {
  const std::vector<double> xs = {1.0, 10.0, 100.0};
  std::vector<double> ys;
  for (const double x : xs) ys.push_back(3.0 * std::pow(x, -0.5));
  const auto fit = experiment::loglog_fit(xs, ys);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.stderr_value < 1e-12);

  CHECK_THROWS_AS(experiment::loglog_fit({1.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(experiment::loglog_fit({1.0, 2.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(experiment::loglog_fit({1.0, 2.0}, {1.0, -1.0}),
                  ConfigError);
  CHECK_THROWS_AS(experiment::loglog_fit({1.0, 1.0}, {1.0, 2.0}),
                  ConfigError);
}

TEST_CASE("function specs scale with the grid dimension") {
  FunctionSpec e1;
  e1.family = testfn::Family::kCosine;
  e1.pattern = "e1";
  e1.scale = 2.0;
  const auto h1 = e1.build(3);
  CHECK(h1.name() == "cosine(2;0;0)");
  CHECK(h1.m1().value() == doctest::Approx(2.0));

  FunctionSpec ones_unit;
  ones_unit.family = testfn::Family::kCosine;
  ones_unit.pattern = "ones_unit";
  const auto h2 = ones_unit.build(4);
  CHECK(h2.direction()(0) == doctest::Approx(0.5));
  CHECK(h2.m1().value() == doctest::Approx(1.0).epsilon(1e-14));

  FunctionSpec ident;
  ident.family = testfn::Family::kQuadratic;
  ident.pattern = "identity";
  ident.scale = 2.0;
  const auto h3 = ident.build(2);
  CHECK(h3.m2() == doctest::Approx(2.0));

  FunctionSpec expl;
  expl.family = testfn::Family::kCosine;
  expl.pattern = "explicit";
  expl.direction = linalg::Vector::Ones(2);
  CHECK_NOTHROW(expl.build(2));
  CHECK_THROWS_AS(expl.build(3), ConfigError);
}

TEST_CASE("experiment runs write deterministic artifacts") {
  const auto dir =
      std::filesystem::temp_directory_path() / "mcltsgd_experiment_test";
  std::filesystem::remove_all(dir);
  const std::string out = (dir / "enum.csv").string();
  const auto cfg = ExperimentConfig::parse_text(enumerate_config(out));

  const RunResult first = experiment::run_experiment(cfg);
  CHECK(first.exit_code == 0);
  CHECK(first.all_certified);
  CHECK(first.rows == 2);
  CHECK(first.artifact_path == out);
  CHECK(first.meta_path == out + ".meta.json");
  REQUIRE(std::filesystem::exists(out));
  REQUIRE(std::filesystem::exists(first.meta_path));

  const std::string bytes = slurp(out);
  CHECK(bytes.find("model,d,n,function,empirical_gap") != std::string::npos);
  CHECK(bytes.find("# config_hash") != std::string::npos);
  CHECK(bytes.find("iid_rademacher,1,2,cosine(1)") != std::string::npos);

  // Rerunning the same config reproduces the artifact byte for byte.
  const RunResult second = experiment::run_experiment(cfg);
  CHECK(second.rows == first.rows);
  CHECK(slurp(out) == bytes);

  std::filesystem::remove_all(dir);
}

TEST_CASE("sweeps merge single-row runs and fit slopes") {
  const auto dir =
      std::filesystem::temp_directory_path() / "mcltsgd_sweep_test";
  std::filesystem::remove_all(dir);
  const std::string out = (dir / "sweep.csv").string();
  const auto base =
      ExperimentConfig::parse_text(enumerate_config(out, "[4]"));

  const RunResult res =
      experiment::run_sweep(base, "horizon", {2.0, 4.0, 8.0});
  CHECK(res.exit_code == 0);
  CHECK(res.rows == 3);
  const std::string bytes = slurp(out);
  CHECK(bytes.find("horizon,model,d,n,function") != std::string::npos);
  CHECK(bytes.find("# loglog_slope thm1 ") != std::string::npos);
  const std::string meta = slurp(res.meta_path);
  CHECK(meta.find("\"slopes\"") != std::string::npos);
  CHECK(meta.find("\"sweep\"") != std::string::npos);

  CHECK_THROWS_AS(experiment::run_sweep(base, "bogus", {1.0, 2.0}),
                  ConfigError);
  CHECK_THROWS_AS(experiment::run_sweep(base, "horizon", {4.0}), ConfigError);

  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
