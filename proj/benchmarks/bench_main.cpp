// Microbenchmarks for the hot paths: raw stream draws, one simulated
// trajectory, the exact coefficient-matrix ledger, and the remainder
// envelope evaluation.

#include <benchmark/benchmark.h>

#include "mcltsgd/bounds.hpp"
#include "mcltsgd/linalg.hpp"
#include "mcltsgd/rng.hpp"
#include "mcltsgd/sgd.hpp"

namespace {

using mcltsgd::linalg::Matrix;
using mcltsgd::linalg::SpdMatrix;
using mcltsgd::linalg::Vector;

void BM_StreamU64(benchmark::State& state) {
  mcltsgd::rng::Stream stream(20260815, 0);
  std::uint64_t acc = 0;
  for (auto _ : state) acc += stream.next_u64();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_StreamU64);

void BM_StreamNormal(benchmark::State& state) {
  mcltsgd::rng::Stream stream(20260815, 0);
  double acc = 0.0;
  for (auto _ : state) acc += stream.normal();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_StreamNormal);

void BM_LinearTrajectory(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Vector diag(d);
  for (int i = 0; i < d; ++i) {
    diag(i) = 1.0 + static_cast<double>(i) / std::max(1, d - 1);
  }
  const SpdMatrix a(Matrix(diag.asDiagonal()));
  const auto noise = mcltsgd::sgd::NoiseModel::gaussian(SpdMatrix::identity(d));
  const mcltsgd::sgd::StepSchedule schedule(0.5, 0.6);
  const Vector theta0 = Vector::Ones(d);
  const int horizon = 1024;
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const auto traj = mcltsgd::sgd::run_linear(
        a, Vector::Zero(d), schedule, theta0, horizon, noise, 7, rep++);
    benchmark::DoNotOptimize(traj.delta_bar);
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_LinearTrajectory)->Arg(1)->Arg(2)->Arg(8);

void BM_LogcoshTrajectory(benchmark::State& state) {
  Matrix design(4, 2);
  design << 1, 0, 0, 1, 0.8, 0.6, -0.6, 0.8;
  Vector targets(4);
  targets << 0.4, -0.3, 0.5, 0.2;
  const auto noise = mcltsgd::sgd::NoiseModel::gaussian(
      SpdMatrix(0.25 * Matrix::Identity(2, 2)));
  const auto problem =
      mcltsgd::sgd::SgdProblem::logcosh_ridge(design, targets, 0.1, noise);
  const mcltsgd::sgd::StepSchedule schedule(0.5, 0.6);
  const Vector theta0 = problem.theta_star() + Vector::Ones(2);
  const int horizon = 1024;
  std::uint64_t rep = 0;
  for (auto _ : state) {
    const auto traj = mcltsgd::sgd::run_sgd(problem, schedule, theta0,
                                            horizon, 7, rep++);
    benchmark::DoNotOptimize(traj.delta_bar);
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_LogcoshTrajectory);

void BM_WLedger(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  Matrix diag(2, 2);
  diag << 1, 0, 0, 2;
  const SpdMatrix a(diag);
  const mcltsgd::sgd::StepSchedule schedule(0.5, 0.5);
  for (auto _ : state) {
    const mcltsgd::bounds::WMatrixLedger ledger(a, schedule, t);
    benchmark::DoNotOptimize(ledger.sum_w2());
  }
}
BENCHMARK(BM_WLedger)->Arg(100)->Arg(316)->Arg(1000);

void BM_Rho(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const mcltsgd::sgd::StepSchedule schedule(0.5, 0.5);
  mcltsgd::bounds::BoundConstants consts;
  consts.k = 1.0;
  consts.k2 = 2.1;
  consts.cprime = 0.15;
  consts.c1 = 1.0;
  consts.c2 = 0.5;
  consts.lambda = 1.0;
  for (auto _ : state) {
    const auto value = mcltsgd::bounds::rho(schedule, t, consts);
    benchmark::DoNotOptimize(value.verbatim);
  }
}
BENCHMARK(BM_Rho)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
