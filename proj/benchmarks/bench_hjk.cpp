#include <benchmark/benchmark.h>

#include "hjk/dual.hpp"
#include "hjk/hj.hpp"
#include "hjk/kappa.hpp"
#include "hjk/systems.hpp"

namespace {

using hjk::TangentPoint;
using hjk::Vector;

Vector scalar(double x) { return Vector::Constant(1, x); }

void BM_EvaluateK(benchmark::State& state) {
  const auto sys = hjk::builtin("oscillator_2d").system;
  const TangentPoint pt(Vector::Constant(2, 0.3), Vector::Constant(2, -0.7));
  for (auto _ : state) benchmark::DoNotOptimize(hjk::evaluate_K(sys, pt));
}
BENCHMARK(BM_EvaluateK);

void BM_DynamicalIdentity(benchmark::State& state) {
  const auto sys = hjk::builtin("singular_affine").system;
  const TangentPoint pt(Vector::Constant(2, 0.3), Vector::Constant(2, -0.7));
  for (auto _ : state) benchmark::DoNotOptimize(hjk::dynamical_identity_residual(sys, pt));
}
BENCHMARK(BM_DynamicalIdentity);

void BM_EvalHess(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  auto f = [](const auto& x) {
    auto acc = x[0] * x[0];
    for (std::size_t i = 1; i < x.size(); ++i) acc = acc + hjk::ad::sin(x[i] * x[i - 1]);
    return acc;
  };
  const Vector z = Vector::LinSpaced(n, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(hjk::ad::eval_hess(f, z));
}
BENCHMARK(BM_EvalHess)->Arg(2)->Arg(4)->Arg(8);

void BM_IntegrateRegular(benchmark::State& state) {
  const auto sys = hjk::builtin("pendulum_1d").system;
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hjk::integrate_regular(sys, TangentPoint(scalar(0.1), scalar(0)), 1e-3, steps));
  }
  state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_IntegrateRegular)->Arg(1000)->Arg(10000);

void BM_CheckStandardHJ(benchmark::State& state) {
  const auto sys = hjk::builtin("oscillator_1d").system;
  const auto x = hjk::ExprSection::parse({"sqrt(1 - q1^2)"}, 1);
  const auto grid = hjk::SampleGrid::uniform(1, {-0.9, 0.9, static_cast<int>(state.range(0))});
  for (auto _ : state) benchmark::DoNotOptimize(hjk::check_standard_hj(sys, x, grid, 1e-8));
}
BENCHMARK(BM_CheckStandardHJ)->Arg(101)->Arg(1001);

void BM_SolveHJ1Dof(benchmark::State& state) {
  const auto sys = hjk::builtin("pendulum_1d").system;
  const int points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hjk::solve_hj_1dof(sys, 2.0, {-1, 1, points}, 1));
}
BENCHMARK(BM_SolveHJ1Dof)->Arg(201)->Arg(2001);

}  // namespace

BENCHMARK_MAIN();
