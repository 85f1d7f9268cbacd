/// Microbenchmarks for the hot paths: keystream draws, synthesis/projection
/// round trips, the forward solver, and one regularizer solve.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "fracback/forward.hpp"
#include "fracback/problem.hpp"
#include "fracback/rng.hpp"
#include "fracback/spectral.hpp"
#include "fracback/truncation.hpp"

namespace {

using namespace fracback;

void BM_NormalDraw(benchmark::State& state) {
  const CounterRng rng(42);
  std::uint64_t node = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rng.normal(StreamPurpose::final_observation, 0, node++, 0));
  }
}
BENCHMARK(BM_NormalDraw);

void BM_Synthesize(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  SpectralField field(32);
  for (std::size_t p = 0; p <= 32; ++p) {
    field.coeffs[p] = 1.0 / (1.0 + static_cast<double>(p));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize(field, n));
  }
}
BENCHMARK(BM_Synthesize)->Arg(64)->Arg(256)->Arg(1024);

void BM_Project(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  SpectralField field(32);
  for (std::size_t p = 0; p <= 32; ++p) {
    field.coeffs[p] = 1.0 / (1.0 + static_cast<double>(p));
  }
  const GridSamples samples = synthesize(field, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(project(samples, 32));
  }
}
BENCHMARK(BM_Project)->Arg(64)->Arg(256)->Arg(1024);

ProblemInstance bench_instance() {
  ProblemInstance instance;
  instance.beta = 1.0;
  instance.T = 0.1;
  instance.a0 = 1.0;
  instance.coefficient = [](double) { return 1.0; };
  instance.nonlinearity = nonlinearity_by_name("sin");
  instance.initial_state =
      add_scaled(SpectralField::mode(1), SpectralField::mode(2), 0.5);
  return instance;
}

void BM_ForwardSolve(benchmark::State& state) {
  const ProblemInstance instance = bench_instance();
  const std::vector<double> grid =
      uniform_grid(instance.T, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_solve(instance, grid, 16));
  }
}
BENCHMARK(BM_ForwardSolve)->Arg(32)->Arg(128);

void BM_FirstRegularizer(benchmark::State& state) {
  const ProblemInstance instance = bench_instance();
  const std::vector<double> grid = uniform_grid(instance.T, 32);
  const Trajectory truth = forward_solve(instance, grid, 16);
  ObservedData observed;
  observed.time_grid = grid;
  observed.final_samples = synthesize(truth.states.back(), 256);
  TruncationParams params;
  params.M_n = 8;
  params.n = 256;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_first_regularizer(observed, instance, params, grid));
  }
}
BENCHMARK(BM_FirstRegularizer);

}  // namespace

BENCHMARK_MAIN();
