#include <benchmark/benchmark.h>

#include "crf/conformal.hpp"
#include "crf/curvature.hpp"
#include "crf/elliptic.hpp"
#include "crf/flow.hpp"
#include "crf/perturbation.hpp"

namespace {

crf::SymmetricMetric perturbed(std::size_t n) {
  crf::Perturbation p;
  p.amplitude = 0.01;
  return crf::perturb(crf::build_background({crf::Family::AhBall, 3, 1, 8.0, n}), p);
}

void BM_Curvature(benchmark::State& state) {
  const auto g = perturbed(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(crf::compute_curvature(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Curvature)->RangeMultiplier(2)->Range(401, 6401)->Complexity(benchmark::oN);

void BM_PressureSolve(benchmark::State& state) {
  const auto g = perturbed(static_cast<std::size_t>(state.range(0)));
  const auto source = crf::pressure_source(crf::compute_curvature(g), g.family(), g.m());
  for (auto _ : state) {
    const auto op = crf::assemble_operator(g);
    benchmark::DoNotOptimize(crf::solve_pressure(op, source));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PressureSolve)->RangeMultiplier(2)->Range(401, 6401)->Complexity(benchmark::oN);

void BM_Rk4Step(benchmark::State& state, crf::FlowMode mode) {
  const auto g = perturbed(static_cast<std::size_t>(state.range(0)));
  const auto initial = crf::make_state(g);
  const double dt = crf::stable_time_step(g, 0.2);
  auto gauge = crf::identity_gauge(g.space());
  for (auto _ : state) {
    benchmark::DoNotOptimize(crf::step(initial, dt, mode, g, mode == crf::FlowMode::Dcrf ? &gauge : nullptr));
  }
}
BENCHMARK_CAPTURE(BM_Rk4Step, crf, crf::FlowMode::Crf)->Arg(401)->Arg(1601);
BENCHMARK_CAPTURE(BM_Rk4Step, dcrf, crf::FlowMode::Dcrf)->Arg(401)->Arg(1601);

void BM_ConformalNormalize(benchmark::State& state) {
  const auto g = perturbed(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(crf::conformal_normalize(g));
}
BENCHMARK(BM_ConformalNormalize)->Arg(401)->Arg(1601);

}  // namespace

BENCHMARK_MAIN();
