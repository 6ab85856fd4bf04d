#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcltsgd/linalg.hpp"
#include "mcltsgd/martingale.hpp"
#include "mcltsgd/sgd.hpp"
#include "mcltsgd/test_functions.hpp"

namespace mcltsgd::experiment {

// Test-function selector. Ridge directions may be given explicitly (fixing
// the dimension) or as a pattern that scales with the grid dimension:
// "e1" (first basis vector), "ones", "ones_unit" (unit-norm ones), and
// "identity" for the quadratic form. `scale` multiplies the direction or
// form, e.g. pattern e1 with scale 2 in d = 1 gives cos(2x).
struct FunctionSpec {
  testfn::Family family = testfn::Family::kCosine;
  std::string pattern = "explicit";
  linalg::Vector direction;
  linalg::Matrix q;
  double scale = 1.0;

  testfn::TestFunction build(int dim) const;
};

struct MartingaleSpec {
  martingale::Kind kind = martingale::Kind::kIidRademacher;
  std::vector<int> dims;
  std::vector<int> horizons;
  linalg::Matrix sigmas;  // deterministic_varying only (single grid point)

  martingale::Model build(int dim, int horizon) const;
};

struct LinearSpec {
  linalg::SpdMatrix a = linalg::SpdMatrix::identity(1);
  linalg::Vector delta0;
  std::vector<int> horizons;
  sgd::NoiseModel noise;
};

struct SgdSpec {
  std::optional<sgd::SgdProblem> problem;  // engaged after parsing
  linalg::Vector theta0;
  std::vector<int> horizons;
};

struct ScheduleSpec {
  double eta0 = 0.0;
  double c3 = 0.0;
  sgd::StepSchedule build() const { return sgd::StepSchedule(eta0, c3); }
};

// Optional empirical-envelope coefficients for the quadratic-minimization
// corollary columns of a `bounds` run (the spectral quantities are derived
// from the configured matrices; these two must be supplied).
struct Cor4Spec {
  double k4 = 0.0;
  double k5 = 0.0;
};

// Fully validated experiment description. Parsing rejects unknown keys,
// missing required keys, and out-of-range values before any computation.
struct ExperimentConfig {
  int schema_version = 1;
  std::string experiment;
  std::string type;    // discrepancy | mclt | trajectories | bounds | covariance
  std::string engine;  // martingale | linear | sgd
  std::optional<MartingaleSpec> martingale;
  std::optional<LinearSpec> linear;
  std::optional<SgdSpec> sgd;
  std::optional<ScheduleSpec> schedule;
  std::optional<FunctionSpec> function;
  std::optional<Cor4Spec> cor4;
  long replications = 0;
  std::uint64_t seed = 0;
  int threads = 0;                     // 0 = resolve from env/hardware
  std::string method = "monte_carlo";  // mclt only: monte_carlo | enumerate
  std::vector<int> calibration = {100, 316, 1000};
  std::optional<double> tolerance;  // covariance type: certification radius
  std::string output_path;
  std::string output_format = "csv";  // csv | json

  // Canonical (sorted-key) serialization of the validated document; its
  // FNV-1a hash is embedded in every artifact.
  std::string canonical_text;
  std::uint64_t config_hash = 0;

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_text(const std::string& text);
};

struct RunResult {
  int exit_code = 0;  // 0 success; 2 = some certification failed
  std::string artifact_path;
  std::string meta_path;
  long rows = 0;
  bool all_certified = true;
  std::string message;
};

// Executes the configured experiment end-to-end and writes the artifact
// (atomically) plus a <artifact>.meta.json sidecar carrying wall-clock
// runtime and certification status. The artifact itself contains only
// deterministic bytes, so reruns with the same config are byte-identical.
RunResult run_experiment(const ExperimentConfig& config);

// Reruns the base experiment once per value with `axis` overridden
// (horizon | dim | reps | eta0 | c3), keeping the master seed fixed across
// values (paired replications for trend reading). Emits one combined table
// whose footer and sidecar carry fitted log-log slopes of every positive
// numeric column against the axis.
RunResult run_sweep(const ExperimentConfig& base, const std::string& axis,
                    const std::vector<double>& values);

struct SlopeFit {
  double slope = 0.0;
  double stderr_value = 0.0;
  double intercept = 0.0;
};

// Least-squares fit of log y against log x. Requires >= 2 points, positive
// finite coordinates, and at least two distinct xs.
SlopeFit loglog_fit(const std::vector<double>& xs,
                    const std::vector<double>& ys);

}  // namespace mcltsgd::experiment
