// Monte Carlo harness: context construction, per-trial determinism, MISE
// aggregation across worker counts, smoothness-budget verification, bound
// reports, log-log rate fits, and the deterministic report writers.

#include "fracback/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fracback/errors.hpp"
#include "fracback/forward.hpp"
#include "json.hpp"

namespace fracback {
namespace {

/// Small noisy truncation experiment used by several tests.
ExperimentConfig demo_config() {
  ExperimentConfig c;
  c.id = "harness_demo";
  c.method = Method::first_truncation;
  c.beta = 0.6;
  c.T = 0.1;
  c.a0 = 1.0;
  c.coefficient_text = "one";
  c.nonlinearity_name = "sin";
  c.u0_text = "modes:1=1,2=0.5";
  c.n = 64;
  c.noise_sigma = 0.05;
  c.V_max = 0.1;
  c.seed = 7;
  c.sigma_rate = 0.9;
  c.grid_steps = 8;
  c.cap = 8;
  c.trials = 6;
  c.workers = 2;
  c.eval_times = {0.05, 0.1};
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

TEST(MakeContextTest, ShapesAndOverride) {
  const ExperimentConfig config = demo_config();
  const ExperimentContext ctx = make_context(config);
  EXPECT_EQ(ctx.n, 64u);
  EXPECT_EQ(ctx.grid.size(), 9u);
  EXPECT_EQ(ctx.truth.states.size(), ctx.grid.size());
  EXPECT_EQ(ctx.true_final.values.size(), 64u);
  EXPECT_TRUE(ctx.true_source.empty()) << "zero source stays unsampled";
  ASSERT_EQ(ctx.coefficient_samples.size(), ctx.grid.size());
  EXPECT_DOUBLE_EQ(ctx.coefficient_samples[3], 1.0);

  const ExperimentContext wide = make_context(config, 128);
  EXPECT_EQ(wide.n, 128u);
  EXPECT_EQ(wide.true_final.values.size(), 128u);
}

TEST(MakeContextTest, SourceIsSampledPerNode) {
  ExperimentConfig config = demo_config();
  config.source_text = "phi:1";
  const ExperimentContext ctx = make_context(config);
  ASSERT_EQ(ctx.true_source.size(), ctx.n);
  ASSERT_EQ(ctx.true_source[0].size(), ctx.grid.size());
  const double phi1 = eigenfunction_value(1, midpoint_node(ctx.n, 1));
  EXPECT_NEAR(ctx.true_source[0][4], phi1, 1e-12)
      << "time-constant source repeats the same slice";
}

TEST(ParamResolutionTest, ZeroMeansSelectFromN) {
  const ExperimentConfig config = demo_config();
  const TruncationParams params = truncation_params_for(config, 256);
  EXPECT_EQ(params.M_n, choose_M_n(256, 0.9, 0.1, 0.6));
  EXPECT_EQ(params.n, 256u);

  ExperimentConfig pinned = demo_config();
  pinned.M_n = 3;
  EXPECT_EQ(truncation_params_for(pinned, 256).M_n, 3u);

  ExperimentConfig qr = demo_config();
  qr.method = Method::quasi_reversibility;
  qr.beta = 1.0;
  const QRParams qp = qr_params_for(qr, 256, nonlinearity_by_name("sin"));
  EXPECT_EQ(qp.M_n, choose_M_n(256, 0.9, 0.1, 1.0));
  EXPECT_TRUE(std::isinf(qp.Q_n))
      << "default keeps the nonlinearity unclamped";
  qr.Q_n = 0.0;
  const QRParams chosen = qr_params_for(qr, 256, nonlinearity_by_name("sin"));
  EXPECT_TRUE(std::isinf(chosen.Q_n))
      << "a globally Lipschitz profile never needs a clamp";
}

TEST(NoiseSpecTest, ConstantSigmasAndPassThrough) {
  ExperimentConfig config = demo_config();
  config.vartheta = 0.25;
  config.eps = 0.01;
  const NoiseSpec spec = make_noise_spec(config, 16);
  ASSERT_EQ(spec.sigma_k.size(), 16u);
  EXPECT_DOUBLE_EQ(spec.sigma_k[7], 0.05);
  EXPECT_DOUBLE_EQ(spec.V_max, 0.1);
  EXPECT_DOUBLE_EQ(spec.vartheta, 0.25);
  EXPECT_DOUBLE_EQ(spec.eps, 0.01);
  EXPECT_EQ(spec.seed, 7u);
}

TEST(AssumptionTest, ExactBudgetsOnSingleModeTruth) {
  // a = 1, beta = 1, u0 = phi_2, F = 0: u_2(t) = e^{-4t}, so the stability
  // sum is identically 1, the alpha = 1 weighted sum is 4, and the Gevrey
  // sum peaks at t = 0 with 2^4 e^{2 T a0 4} = 16 e^{1.6}.
  ProblemInstance instance;
  instance.beta = 1.0;
  instance.T = 0.2;
  instance.coefficient = [](double) { return 1.0; };
  instance.a0 = 1.0;
  instance.nonlinearity = nonlinearity_by_name("zero");
  instance.initial_state = SpectralField::mode(2);
  const std::vector<double> grid = uniform_grid(instance.T, 8);
  const Trajectory truth = forward_solve(instance, grid, 8);

  SmoothnessAssumptions claims;
  claims.claim_stability = true;
  claims.claim_weighted = true;
  claims.claim_gevrey = true;
  claims.alpha = 1.0;
  const AssumptionReport report =
      verify_assumptions(truth, instance, claims, 8);
  EXPECT_TRUE(report.all_verified);
  ASSERT_EQ(report.checks.size(), 5u);
  EXPECT_EQ(report.checks[0].name, "stability");
  EXPECT_EQ(report.checks[1].name, "weighted_stability");
  EXPECT_EQ(report.checks[2].name, "source_smoothness");
  EXPECT_EQ(report.checks[3].name, "gevrey_solution");
  EXPECT_EQ(report.checks[4].name, "gevrey_source");
  EXPECT_NEAR(report.assumptions.P1, 1.0, 1e-12);
  EXPECT_NEAR(report.assumptions.P2, 4.0, 1e-12);
  EXPECT_NEAR(report.checks[3].budget, 16.0 * std::exp(1.6), 1e-9);
  EXPECT_NEAR(report.checks[4].budget, 0.0, 0.0) << "no source claimed";
  EXPECT_NEAR(report.assumptions.E1, 6.0, 1e-9)
      << "E = sup||u|| = 1 for the zero profile, E1 = E/T + E";
  ASSERT_EQ(report.checks[0].partial_sums.size(), 4u);
}

TEST(AssumptionTest, SourceBudgetUsesTheSourceAlone) {
  ProblemInstance instance;
  instance.beta = 1.0;
  instance.T = 0.2;
  instance.coefficient = [](double) { return 1.0; };
  instance.a0 = 1.0;
  instance.nonlinearity = nonlinearity_by_name("zero");
  instance.initial_state = SpectralField::mode(1);
  const SpectralField g = add_scaled(SpectralField::mode(1),
                                     SpectralField::mode(3), 0.5);
  instance.source = [g](double) { return g; };
  const std::vector<double> grid = uniform_grid(instance.T, 8);
  const Trajectory truth = forward_solve(instance, grid, 8);

  SmoothnessAssumptions claims;
  claims.claim_source = true;
  claims.gamma_source = 2.0;
  const AssumptionReport report =
      verify_assumptions(truth, instance, claims, 8);
  // E2 = 1^4 * 1 + 3^4 * 0.25 = 21.25, independent of the trajectory.
  EXPECT_NEAR(report.assumptions.E2, 21.25, 1e-12);
  EXPECT_TRUE(report.checks[2].verified);
  // Gevrey source budget peaks where the weight does: e^{0.4} + 20.25 e^{3.6}.
  EXPECT_NEAR(report.checks[4].budget,
              std::exp(0.4) + 20.25 * std::exp(3.6), 1e-9);
}

TEST(AssumptionTest, UnsettledTailRefutesTheClaim) {
  // u0_p = 1/p makes the stability sum a partial zeta(2): the last quarter
  // of modes still moves the total, so the claim must come back unverified.
  ProblemInstance instance;
  instance.beta = 1.0;
  instance.T = 0.1;
  instance.coefficient = [](double) { return 1.0; };
  instance.a0 = 1.0;
  instance.nonlinearity = nonlinearity_by_name("zero");
  SpectralField u0(16);
  for (std::size_t p = 1; p <= 16; ++p) {
    u0.coeffs[p] = 1.0 / static_cast<double>(p);
  }
  instance.initial_state = u0;
  const std::vector<double> grid = uniform_grid(instance.T, 4);
  const Trajectory truth = forward_solve(instance, grid, 16);

  SmoothnessAssumptions claims;
  claims.claim_stability = true;
  const AssumptionReport report =
      verify_assumptions(truth, instance, claims, 16);
  EXPECT_FALSE(report.checks[0].verified);
  EXPECT_FALSE(report.all_verified);
  double partial_zeta = 0.0;
  for (std::size_t p = 1; p <= 16; ++p) {
    partial_zeta += 1.0 / static_cast<double>(p * p);
  }
  EXPECT_NEAR(report.checks[0].budget, partial_zeta, 1e-9);
}

TEST(AssumptionTest, GevreyOverflowIsUnverifiedNotFatal) {
  ProblemInstance instance;
  instance.beta = 1.0;
  instance.T = 13.0;
  instance.coefficient = [](double) { return 1.0; };
  instance.a0 = 1.0;
  instance.nonlinearity = nonlinearity_by_name("zero");
  SpectralField u0(30);
  u0.coeffs[30] = 1e-200;
  instance.initial_state = u0;
  Trajectory truth;
  truth.time_grid = {0.0};
  truth.states = {u0};
  SmoothnessAssumptions claims;
  claims.claim_gevrey = true;
  const AssumptionReport report =
      verify_assumptions(truth, instance, claims, 30);
  EXPECT_FALSE(report.checks[3].verified);
  EXPECT_TRUE(std::isinf(report.checks[3].budget));
  EXPECT_FALSE(report.all_verified);
}

TEST(RunTrialTest, DeterministicPerTrialKey) {
  const ExperimentContext ctx = make_context(demo_config());
  const TrialReport a = run_trial(ctx, 3);
  const TrialReport b = run_trial(ctx, 3);
  EXPECT_EQ(a.l2_errors, b.l2_errors);
  EXPECT_EQ(a.times, b.times);
  const TrialReport c = run_trial(ctx, 4);
  EXPECT_NE(a.l2_errors, c.l2_errors) << "distinct trials see distinct noise";
  ASSERT_EQ(a.times.size(), 2u);
  EXPECT_NEAR(a.times[0], 0.05, 1e-12) << "evaluation times snap to the grid";
  EXPECT_FALSE(a.hbeta_errors.size() > 0)
      << "truncation methods report L2 errors only";
}

TEST(RunTrialTest, ErrorsCarryTheTrialIndex) {
  ExperimentConfig config = demo_config();
  config.noise_sigma = 0.2;  // >= V_max = 0.1: rejected inside the trial
  const ExperimentContext ctx = [&] {
    ExperimentConfig ok = config;
    ok.noise_sigma = 0.05;
    ExperimentContext c = make_context(ok);
    c.config = config;
    return c;
  }();
  try {
    (void)run_trial(ctx, 5);
    FAIL() << "expected validation_error";
  } catch (const validation_error& e) {
    EXPECT_NE(std::string(e.what()).find("trial 5"), std::string::npos)
        << "message was: " << e.what();
  }
}

TEST(EstimateMiseTest, MeanOfSquaresAndWorkerInvariance) {
  ExperimentConfig config = demo_config();
  config.workers = 1;
  const ExperimentContext serial = make_context(config);
  const MiseResult one = estimate_mise(serial);

  config.workers = 3;
  const ExperimentContext pooled = make_context(config);
  const MiseResult three = estimate_mise(pooled);
  EXPECT_EQ(one.mise, three.mise) << "partitioning must not change results";
  EXPECT_EQ(one.std_error, three.std_error);

  ASSERT_EQ(one.mise.size(), 2u);
  ASSERT_EQ(one.trials, 6u);
  for (std::size_t i = 0; i < one.times.size(); ++i) {
    double sum = 0.0;
    for (std::size_t r = 0; r < config.trials; ++r) {
      const double e = run_trial(serial, r).l2_errors[i];
      sum += e * e;
    }
    EXPECT_NEAR(one.mise[i], sum / static_cast<double>(config.trials), 1e-15);
    EXPECT_GT(one.std_error[i], 0.0);
  }
  EXPECT_EQ(one.flagged_trials, 0u);
}

TEST(EstimateMiseTest, SingleTrialHasZeroStandardError) {
  ExperimentConfig config = demo_config();
  config.trials = 1;
  config.workers = 1;
  const MiseResult result = estimate_mise(make_context(config));
  ASSERT_EQ(result.std_error.size(), 2u);
  EXPECT_DOUBLE_EQ(result.std_error[0], 0.0);
  EXPECT_DOUBLE_EQ(result.std_error[1], 0.0);
}

TEST(EstimateMiseTest, CoefficientEscapesAreFlaggedNotFatal) {
  ExperimentConfig config;
  config.id = "flagged";
  config.method = Method::quasi_reversibility;
  config.beta = 1.0;
  config.T = 1.0;
  config.a0 = 1.0;
  config.coefficient_text = "constant:0.99";
  config.nonlinearity_name = "zero";
  config.u0_text = "phi:1";
  config.n = 16;
  config.noise_sigma = 0.0;
  config.eps = 0.5;  // large coefficient noise: paths leave (0, a0]
  config.seed = 3;
  config.M_n = 1;
  config.grid_steps = 8;
  config.cap = 4;
  config.trials = 8;
  config.workers = 2;
  config.eval_times = {1.0};
  config.bound_kind = "qr";
  const MiseResult result = estimate_mise(make_context(config));
  EXPECT_GE(result.flagged_trials, 1u);
  EXPECT_LT(result.min_realized_b0, 0.99);
  ASSERT_EQ(result.hbeta_mise.size(), 1u) << "QR reports the H^beta error too";
}

TEST(FitLogSlopeTest, ExactPowerLawAndDegenerateInputs) {
  const std::vector<double> x = {2.0, 4.0, 8.0, 16.0};
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = 3.0 * std::pow(x[i], -1.7);
  }
  EXPECT_NEAR(fit_log_slope(x, y), -1.7, 1e-12);
  EXPECT_DOUBLE_EQ(fit_log_slope({5.0, 5.0, 5.0}, {1.0, 2.0, 3.0}), 0.0);
  EXPECT_NEAR(fit_log_slope({1.0, 2.0, 3.0}, {0.0, 4.0, 9.0}), 2.0, 1e-12)
      << "non-positive values are excluded from the fit";
  EXPECT_DOUBLE_EQ(fit_log_slope({1.0, 2.0}, {0.0, 4.0}), 0.0)
      << "fewer than two usable points";
}

TEST(EvaluateBoundsTest, TruncationBoundDecaysTowardT) {
  const ExperimentContext ctx = make_context(demo_config());
  const BoundReport report = evaluate_bounds(ctx);
  ASSERT_EQ(report.times.size(), 2u);
  EXPECT_TRUE(std::isfinite(report.l2_values[0]));
  EXPECT_GT(report.l2_values[0], 0.0);
  EXPECT_GT(report.l2_values[0], report.l2_values[1])
      << "e^{-2 M^{2 beta} t} shrinks the bracket as t grows";
  EXPECT_TRUE(report.hbeta_values.empty());
  EXPECT_FALSE(report.t_n_value.has_value());
  EXPECT_EQ(report.assumption_report.checks.size(), 5u);
}

TEST(EvaluateBoundsTest, QrBoundReportsInitialTimeWhenRootExists) {
  ExperimentConfig config;
  config.id = "qr_root";
  config.method = Method::quasi_reversibility;
  config.beta = 1.0;
  config.T = 1.0;
  config.a0 = 0.25;
  config.coefficient_text = "constant:0.2";
  config.nonlinearity_name = "zero";
  config.u0_text = "phi:1";
  config.n = 64;
  config.noise_sigma = 0.01;
  config.V_max = 0.05;
  config.eps = 0.02;
  config.M_n = 3;
  config.grid_steps = 16;
  config.cap = 8;
  config.trials = 2;
  config.eval_times = {0.5, 1.0};
  config.bound_kind = "qr";
  const ExperimentContext ctx = make_context(config);
  const BoundReport report = evaluate_bounds(ctx, 0.05);
  ASSERT_EQ(report.hbeta_values.size(), 2u);
  EXPECT_TRUE(std::isfinite(report.l2_values[0]));
  EXPECT_TRUE(std::isfinite(report.hbeta_values[0]))
      << "realized b0 = 0.05 > 0 activates the H^beta bound";
  ASSERT_TRUE(report.t_n_value.has_value())
      << "e^{-T M^beta} = e^{-3} < T = 1";
  EXPECT_GT(*report.t_n_value, 0.0);

  const BoundReport no_floor = evaluate_bounds(ctx, 0.0);
  EXPECT_TRUE(std::isinf(no_floor.hbeta_values[0]));
}

TEST(RateSweepTest, ShapesSlopesAndGuards) {
  ExperimentConfig config = demo_config();
  config.id = "sweep_mini";
  config.sweep_n = {16, 32, 64};
  config.trials = 4;
  config.eval_times = {0.05, 0.1};
  const SweepResult result = rate_sweep(config);
  ASSERT_EQ(result.points.size(), 6u);
  ASSERT_EQ(result.slopes.size(), 2u);
  ASSERT_EQ(result.predicted.size(), 2u);
  EXPECT_NEAR(result.predicted[0], -0.45, 1e-12) << "-sigma t / T at t = T/2";
  EXPECT_NEAR(result.predicted[1], -0.9, 1e-12);
  EXPECT_EQ(result.points[0].n, 16u);
  EXPECT_EQ(result.points[0].M_n, choose_M_n(16, 0.9, 0.1, 0.6));
  EXPECT_DOUBLE_EQ(result.points[1].t, 0.1);
  EXPECT_EQ(result.points[2].n, 32u);
  EXPECT_FALSE(result.noise_free_floor);
  EXPECT_TRUE(std::isfinite(result.slopes[0]));

  ExperimentConfig two = config;
  two.sweep_n = {16, 32};
  EXPECT_THROW((void)rate_sweep(two), validation_error);
  ExperimentConfig no_times = config;
  no_times.eval_times.clear();
  EXPECT_THROW((void)rate_sweep(no_times), validation_error);
}

TEST(RateSweepTest, NoiseFreeSweepIsFlagged) {
  ExperimentConfig config = demo_config();
  config.id = "sweep_floor";
  config.noise_sigma = 0.0;
  config.sweep_n = {16, 32, 64};
  config.trials = 2;
  config.eval_times = {0.1};
  const SweepResult result = rate_sweep(config);
  EXPECT_TRUE(result.noise_free_floor)
      << "zero noise means the fitted slope reflects bias, not the rate";
}

TEST(WritersTest, TrialCsvIsDeterministicAndComplete) {
  const ExperimentContext ctx = make_context(demo_config());
  const TrialReport report = run_trial(ctx, 0);
  const std::string path_a = "harness_test_trial_a.csv";
  const std::string path_b = "harness_test_trial_b.csv";
  write_trial_csv(path_a, report);
  write_trial_csv(path_b, report);
  const std::string a = slurp(path_a);
  EXPECT_EQ(a, slurp(path_b)) << "byte-identical across writes";
  EXPECT_NE(a.find("trial,t,metric,value"), std::string::npos);
  EXPECT_NE(a.find("l2_error"), std::string::npos);
  std::size_t rows = 0;
  for (char ch : a) {
    rows += ch == '\n' ? 1u : 0u;
  }
  EXPECT_GE(rows, 1u + report.times.size());
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());
}

TEST(WritersTest, MiseOutputsRoundTripThroughJson) {
  const ExperimentContext ctx = make_context(demo_config());
  const MiseResult result = estimate_mise(ctx);
  const BoundReport bounds = evaluate_bounds(ctx);
  const std::string csv_path = "harness_test_mise.csv";
  const std::string json_path = "harness_test_mise.json";
  write_mise_csv(csv_path, result, bounds);
  write_mise_json(json_path, ctx.config, result, bounds);

  const std::string csv = slurp(csv_path);
  EXPECT_NE(csv.find("t,metric,mise,stderr,bound"), std::string::npos);

  const nlohmann::json doc = nlohmann::json::parse(slurp(json_path));
  EXPECT_EQ(doc.at("id").get<std::string>(), "harness_demo");
  EXPECT_EQ(doc.at("method").get<std::string>(), "first_truncation");
  EXPECT_EQ(doc.at("trials").get<std::size_t>(), 6u);
  ASSERT_EQ(doc.at("mise").size(), result.mise.size());
  EXPECT_DOUBLE_EQ(doc.at("mise")[0].get<double>(), result.mise[0]);
  EXPECT_DOUBLE_EQ(doc.at("bound_l2")[1].get<double>(), bounds.l2_values[1]);
  EXPECT_FALSE(doc.contains("hbeta_mise"))
      << "truncation runs carry no H^beta block";
  ASSERT_TRUE(doc.contains("assumptions"));
  EXPECT_EQ(doc.at("assumptions").at("checks").size(), 5u);
  std::remove(csv_path.c_str());
  std::remove(json_path.c_str());
}

TEST(WritersTest, SweepCsvCarriesSlopeRows) {
  ExperimentConfig config = demo_config();
  config.id = "sweep_csv";
  config.sweep_n = {16, 32, 64};
  config.trials = 2;
  config.eval_times = {0.1};
  const SweepResult result = rate_sweep(config);
  const std::string path = "harness_test_sweep.csv";
  write_sweep_csv(path, result);
  const std::string csv = slurp(path);
  EXPECT_NE(csv.find("n,M_n,t,mise,stderr,bound,slope"), std::string::npos);
  EXPECT_NE(csv.find("\n16,"), std::string::npos);
  EXPECT_NE(csv.find("\n64,"), std::string::npos);
  std::remove(path.c_str());
}

TEST(InvariantSuiteTest, EveryCrossModuleCheckPasses) {
  const std::vector<InvariantResult> results = run_invariant_suite();
  EXPECT_GE(results.size(), 14u);
  for (const InvariantResult& r : results) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
}

}  // namespace
}  // namespace fracback
