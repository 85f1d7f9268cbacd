// Forward solver: per-mode exponential integrating factors, second-order
// predictor-corrector handling of the nonlinearity, and the mild-form
// consistency residual.

#include "fracback/forward.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "fracback/errors.hpp"

namespace fracback {
namespace {

ProblemInstance linear_instance(double beta, double T,
                                std::function<double(double)> a, double a0) {
  ProblemInstance instance;
  instance.beta = beta;
  instance.T = T;
  instance.coefficient = std::move(a);
  instance.a0 = a0;
  instance.nonlinearity = nonlinearity_by_name("zero");
  return instance;
}

TEST(ApplyPointwiseTest, LinearFunctionIsReproduced) {
  // f(u) = 2u maps each coefficient to twice itself; the pseudospectral
  // round trip is exact for bandlimited fields.
  Nonlinearity doubler;
  doubler.name = "doubler";
  doubler.f = [](double u) { return 2.0 * u; };
  SpectralField field(5);
  field.coeffs = {0.5, 1.0, -0.5, 0.0, 0.25, -1.0};
  const SpectralField out = apply_pointwise(doubler, field, 5);
  for (std::size_t p = 0; p <= 5; ++p) {
    EXPECT_NEAR(out.at(p), 2.0 * field.at(p), 1e-12) << "mode " << p;
  }
}

TEST(ApplyPointwiseTest, ZeroNonlinearityGivesZeroField) {
  const SpectralField out =
      apply_pointwise(nonlinearity_by_name("zero"), SpectralField::mode(2), 6);
  for (std::size_t p = 0; p <= 6; ++p) {
    EXPECT_EQ(out.at(p), 0.0);
  }
}

TEST(ForwardSolveTest, ConstantCoefficientHeatDecayIsExact) {
  // F = 0, a = 1: u_p(t) = e^{-t p^{2 beta}} u_p(0). The integrating factor
  // is exact, so the discrete solution matches to rounding regardless of
  // step count.
  ProblemInstance instance =
      linear_instance(0.8, 0.5, [](double) { return 1.0; }, 1.0);
  instance.initial_state = add_scaled(SpectralField::mode(1),
                                      SpectralField::mode(3), -0.4);
  const std::vector<double> grid = uniform_grid(instance.T, 10);
  const Trajectory traj = forward_solve(instance, grid, 8);
  ASSERT_EQ(traj.states.size(), grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    EXPECT_NEAR(traj.states[j].at(1), std::exp(-t), 1e-12) << "t = " << t;
    EXPECT_NEAR(traj.states[j].at(3),
                -0.4 * std::exp(-t * std::pow(3.0, 1.6)), 1e-12)
        << "t = " << t;
    EXPECT_EQ(traj.states[j].at(5), 0.0) << "unexcited modes stay zero";
  }
}

TEST(ForwardSolveTest, TimeDependentCoefficientMatchesClosedForm) {
  // a(t) = 1/2 + t/2: u_p(t) = e^{-p^{2 beta} (t/2 + t^2/4)} u_p(0). The
  // per-step Simpson rule integrates the affine coefficient exactly.
  ProblemInstance instance =
      linear_instance(1.0, 1.0, [](double t) { return 0.5 + 0.5 * t; }, 1.0);
  instance.initial_state = SpectralField::mode(2);
  const std::vector<double> grid = uniform_grid(instance.T, 16);
  const Trajectory traj = forward_solve(instance, grid, 4);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    const double integral = 0.5 * t + 0.25 * t * t;
    EXPECT_NEAR(traj.states[j].at(2), std::exp(-4.0 * integral), 1e-12)
        << "t = " << t;
  }
}

TEST(ForwardSolveTest, ConstantSourceMatchesClosedForm) {
  // F = 0, g = phi_1 constant in time, a = 1:
  // u_1(t) = e^{-t} u_1(0) + (1 - e^{-t}).
  ProblemInstance instance =
      linear_instance(1.0, 1.0, [](double) { return 1.0; }, 1.0);
  instance.initial_state = SpectralField::mode(1, 0.5);
  instance.source = [](double) { return SpectralField::mode(1); };
  const std::vector<double> grid = uniform_grid(instance.T, 256);
  const Trajectory traj = forward_solve(instance, grid, 4);
  const double t = grid.back();
  const double expected = 0.5 * std::exp(-t) + (1.0 - std::exp(-t));
  EXPECT_NEAR(traj.states.back().at(1), expected, 1e-6)
      << "trapezoid-in-source error should be O(h^2)";
}

TEST(ForwardSolveTest, NonlinearStepIsSecondOrder) {
  // Richardson check on u(T) for F = sin: halving the step should cut the
  // difference to the fine reference by about 4.
  ProblemInstance instance =
      linear_instance(1.0, 0.25, [](double) { return 1.0; }, 1.0);
  instance.nonlinearity = nonlinearity_by_name("sin");
  instance.initial_state = SpectralField::mode(1);
  const std::size_t cap = 8;
  const Trajectory fine =
      forward_solve(instance, uniform_grid(instance.T, 2048), cap);
  const Trajectory coarse =
      forward_solve(instance, uniform_grid(instance.T, 64), cap);
  const Trajectory mid =
      forward_solve(instance, uniform_grid(instance.T, 128), cap);
  const double err_coarse =
      l2_distance(coarse.states.back(), fine.states.back());
  const double err_mid = l2_distance(mid.states.back(), fine.states.back());
  EXPECT_GT(err_coarse / err_mid, 3.0)
      << "halving the step should shrink the error by about 4 (got "
      << err_coarse << " / " << err_mid << ")";
}

TEST(ForwardSolveTest, RefinementGuardAcceptsResolvedRuns) {
  ProblemInstance instance =
      linear_instance(1.0, 0.2, [](double) { return 1.0; }, 1.0);
  instance.nonlinearity = nonlinearity_by_name("sin");
  instance.initial_state = SpectralField::mode(1);
  EXPECT_NO_THROW(
      (void)forward_solve(instance, uniform_grid(instance.T, 512), 8, 1e-6));
  EXPECT_THROW(
      (void)forward_solve(instance, uniform_grid(instance.T, 2), 8, 1e-12),
      numerical_error)
      << "a 2-step grid cannot meet a 1e-12 refinement tolerance";
}

TEST(MildResidualTest, LinearTrajectoryHasTinyResidual) {
  // For F = 0 the mild representation is the exact decay the solver already
  // uses, so the residual is pure quadrature noise.
  ProblemInstance instance =
      linear_instance(1.0, 0.3, [](double) { return 1.0; }, 1.0);
  instance.initial_state = SpectralField::mode(1);
  const Trajectory traj =
      forward_solve(instance, uniform_grid(instance.T, 200), 4);
  EXPECT_LE(mild_residual(traj, instance), 1e-10);
}

TEST(MildResidualTest, RequiresUnitCoefficient) {
  ProblemInstance instance =
      linear_instance(1.0, 0.3, [](double) { return 0.5; }, 1.0);
  instance.initial_state = SpectralField::mode(1);
  const Trajectory traj =
      forward_solve(instance, uniform_grid(instance.T, 10), 4);
  EXPECT_THROW((void)mild_residual(traj, instance), validation_error);
}

TEST(MildResidualTest, ReportsExcludedAmplificationPairs) {
  // beta = 1, T = 30: mode 5 at t = 0 amplifies by e^{750} which exceeds the
  // floating guard, so that pair must be excluded and counted.
  ProblemInstance instance =
      linear_instance(1.0, 30.0, [](double) { return 1.0; }, 1.0);
  instance.initial_state = SpectralField::mode(5);
  const Trajectory traj =
      forward_solve(instance, uniform_grid(instance.T, 30), 5);
  std::size_t excluded = 0;
  (void)mild_residual(traj, instance, &excluded);
  EXPECT_GT(excluded, 0u);
}

TEST(TrajectoryCsvTest, WritesHeaderAndAllModes) {
  ProblemInstance instance =
      linear_instance(1.0, 0.1, [](double) { return 1.0; }, 1.0);
  instance.initial_state = SpectralField::mode(1);
  const std::vector<double> grid = uniform_grid(instance.T, 2);
  const Trajectory traj = forward_solve(instance, grid, 3);
  const std::string path = "forward_test_trajectory.csv";
  write_trajectory_csv(path, traj);
  std::ifstream in(path);
  ASSERT_TRUE(in.is_open());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,p,coefficient");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
  }
  EXPECT_EQ(rows, grid.size() * 4u) << "3 time nodes x modes 0..3";
  in.close();
  std::remove(path.c_str());
}

}  // namespace
}  // namespace fracback
