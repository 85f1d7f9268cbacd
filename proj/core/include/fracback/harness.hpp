#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracback/config.hpp"
#include "fracback/noise.hpp"
#include "fracback/problem.hpp"
#include "fracback/quasi_reversibility.hpp"
#include "fracback/truncation.hpp"

namespace fracback {

/// Immutable per-configuration state shared by all trials: the materialized
/// problem, its solved ground truth, and the noise-free observables.
struct ExperimentContext {
  ExperimentConfig config;
  std::size_t n = 0;  // active sample count (sweeps override config.n)
  ProblemInstance instance;
  std::vector<double> grid;
  Trajectory truth;
  GridSamples true_final;
  std::vector<std::vector<double>> true_source;  // empty when g = 0
  std::vector<double> coefficient_samples;       // a(t_j)
};

/// Validates the config, solves the ground truth once, and samples the
/// noise-free observables. n_override replaces config.n when nonzero.
[[nodiscard]] ExperimentContext make_context(const ExperimentConfig& config,
                                             std::size_t n_override = 0);

/// Noise spec for the active sample count (constant per-node sigma).
[[nodiscard]] NoiseSpec make_noise_spec(const ExperimentConfig& config,
                                        std::size_t n);

/// Cutoff/clamp controls resolved for the active sample count (selection
/// rules apply when the config leaves them at 0).
[[nodiscard]] TruncationParams truncation_params_for(
    const ExperimentConfig& config, std::size_t n);
[[nodiscard]] QRParams qr_params_for(const ExperimentConfig& config,
                                     std::size_t n,
                                     const Nonlinearity& nonlinearity);

/// Claimed smoothness assumptions and their computed budgets: stability (P1),
/// weighted stability at exponent alpha (P2), source smoothness at exponent
/// gamma_source (E2, the weighted square sum), Gevrey-class membership of the
/// solution and the source, and the derived constant E1.
struct SmoothnessAssumptions {
  bool claim_stability = false;
  bool claim_weighted = false;
  bool claim_source = false;
  bool claim_gevrey = false;
  double alpha = 1.0;         // > 0
  double gamma_source = 2.0;  // > 1
  double delta = 2.0;         // > 1
  double P1 = 0.0;
  double P2 = 0.0;
  double E2 = 0.0;
  double E1 = 0.0;
};

/// One verified (or refuted) claim: the computed budget up to cap and the
/// quarter-cap partial suprema used as the growth diagnostic.
struct AssumptionCheck {
  std::string name;
  bool claimed = false;
  bool verified = false;
  double budget = 0.0;
  std::vector<double> partial_sums;  // at cap/4, cap/2, 3cap/4, cap
};

struct AssumptionReport {
  SmoothnessAssumptions assumptions;  // input copy with budgets filled in
  std::vector<AssumptionCheck> checks;
  bool all_verified = true;  // over the claimed checks only
};

/// Computes each claimed supremum up to cap on the trajectory (the source
/// checks use instance.source on the trajectory grid). A budget whose last
/// quarter of modes still contributes is flagged unverified (divergence
/// diagnostic); overflowing Gevrey sums are unverified with infinite budget.
[[nodiscard]] AssumptionReport verify_assumptions(
    const Trajectory& truth, const ProblemInstance& instance,
    const SmoothnessAssumptions& claims, std::size_t cap);

/// One Monte Carlo trial's errors and diagnostics.
struct TrialReport {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> times;         // evaluation times (grid nodes)
  std::vector<double> l2_errors;     // per evaluation time
  std::vector<double> hbeta_errors;  // QR only, order-beta Sobolev error
  std::optional<double> error_at_t_n;  // QR only: ||W(., t_n) - u(., 0)||
  std::size_t picard_iterations = 0;
  bool coefficient_within_bound = true;
  double realized_b0 = 0.0;
};

/// Runs one trial: observe with the trial-keyed noise streams, regularize by
/// the configured method, and measure errors against the cached truth.
/// Deterministic in (config, trial). Module errors are rethrown with the
/// trial index prepended.
[[nodiscard]] TrialReport run_trial(const ExperimentContext& context,
                                    std::size_t trial);

/// Monte Carlo MISE estimate: per-time sample means of the squared errors
/// with standard errors (zero when trials < 2).
struct MiseResult {
  std::vector<double> times;
  std::vector<double> mise;
  std::vector<double> std_error;
  std::vector<double> hbeta_mise;       // QR only
  std::vector<double> hbeta_std_error;  // QR only
  std::optional<double> t_n_mise;       // QR only: mean squared t_n error
  std::optional<double> t_n_std_error;
  std::size_t trials = 0;
  std::size_t flagged_trials = 0;  // coefficient escaped (0, a0]
  double min_realized_b0 = 0.0;    // over trials (QR)
};

[[nodiscard]] MiseResult estimate_mise(const ExperimentContext& context);

/// A priori error-bound values at the context's evaluation times, with
/// budgets taken from the config or computed from the truth when left at
/// zero.
struct BoundReport {
  std::vector<double> times;
  std::vector<double> l2_values;
  std::vector<double> hbeta_values;        // QR only (infinite when b0 <= 0)
  std::optional<double> t_n_value;         // QR only: initial-time estimate
  bool assumptions_verified = true;
  AssumptionReport assumption_report;
};

[[nodiscard]] BoundReport evaluate_bounds(const ExperimentContext& context,
                                          double realized_b0 = 0.0);

/// Least-squares slope of log(y) against log(x). Requires >= 2 positive
/// points; returns 0 on a degenerate (constant-x) fit.
[[nodiscard]] double fit_log_slope(const std::vector<double>& x,
                                   const std::vector<double>& y);

/// Convergence sweep over the configured n list.
struct SweepPoint {
  std::size_t n = 0;
  std::size_t M_n = 0;
  double t = 0.0;
  double mise = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // one per (n, evaluation time)
  std::vector<double> times;
  std::vector<double> slopes;     // fitted log-log slope per time
  std::vector<double> predicted;  // -sigma_rate * t / T per time
  bool degenerate_fit = false;    // non-monotone beyond 3-sigma MC noise
  bool noise_free_floor = false;  // every noise amplitude is zero
};

/// Runs estimate_mise per sweep n (>= 3 points required) and fits the
/// log-log slope at each evaluation time.
[[nodiscard]] SweepResult rate_sweep(const ExperimentConfig& config);

/// Cross-module invariant suite behind the `check` subcommand.
struct InvariantResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

[[nodiscard]] std::vector<InvariantResult> run_invariant_suite();

/// Report writers. CSV uses the long format (header row, '.' decimals);
/// JSON mirrors the same values. Output is a deterministic function of the
/// inputs (no timestamps).
void write_trial_csv(const std::string& path, const TrialReport& report);
void write_mise_csv(const std::string& path, const MiseResult& result,
                    const BoundReport& bounds);
void write_sweep_csv(const std::string& path, const SweepResult& result);
void write_mise_json(const std::string& path, const ExperimentConfig& config,
                     const MiseResult& result, const BoundReport& bounds);
void write_trial_json(const std::string& path, const ExperimentConfig& config,
                      const TrialReport& report);

}  // namespace fracback
