#include "fracback/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <utility>

#include "fracback/csv.hpp"
#include "fracback/errors.hpp"
#include "fracback/forward.hpp"
#include "fracback/rng.hpp"
#include "json.hpp"

namespace fracback {

namespace {

constexpr double kExpGuard = 700.0;
const double kPi = std::acos(-1.0);

double mode_rate(std::size_t p, double beta) {
  return p == 0 ? 0.0 : std::pow(static_cast<double>(p), 2.0 * beta);
}

/// Grid indices of the evaluation times (every node when none are given;
/// otherwise each requested time snaps to the nearest node).
std::vector<std::size_t> evaluation_nodes(const std::vector<double>& grid,
                                          const std::vector<double>& times) {
  std::vector<std::size_t> nodes;
  if (times.empty()) {
    nodes.resize(grid.size());
    std::iota(nodes.begin(), nodes.end(), std::size_t{0});
    return nodes;
  }
  nodes.reserve(times.size());
  for (double t : times) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      if (std::abs(grid[j] - t) < std::abs(grid[best] - t)) {
        best = j;
      }
    }
    nodes.push_back(best);
  }
  return nodes;
}

/// Per-quarter-cap suprema over the states of
/// sum_{p=1..q} p^{mode_power} e^{exponent(p, j)} c_p^2, with overflowing
/// exponents turning the sum infinite.
template <typename Exponent>
std::vector<double> partial_sups(const std::vector<SpectralField>& states,
                                 std::size_t cap, double mode_power,
                                 Exponent&& exponent) {
  const std::array<std::size_t, 4> quarters = {
      std::max<std::size_t>(1, cap / 4), std::max<std::size_t>(1, cap / 2),
      std::max<std::size_t>(1, 3 * cap / 4), cap};
  std::vector<double> sups(4, 0.0);
  for (std::size_t j = 0; j < states.size(); ++j) {
    double run = 0.0;
    std::array<double, 4> at_quarter = {0.0, 0.0, 0.0, 0.0};
    std::size_t qi = 0;
    for (std::size_t p = 1; p <= cap; ++p) {
      const double c = states[j].at(p);
      if (c != 0.0) {
        const double e = exponent(p, j);
        if (e > kExpGuard) {
          run = std::numeric_limits<double>::infinity();
        } else {
          run += std::pow(static_cast<double>(p), mode_power) * std::exp(e) *
                 c * c;
        }
      }
      while (qi < 4 && p == quarters[qi]) {
        at_quarter[qi] = run;
        ++qi;
      }
    }
    for (std::size_t k = 0; k < 4; ++k) {
      sups[k] = std::max(sups[k], at_quarter[k]);
    }
  }
  return sups;
}

/// A budget is trusted when it is finite and the last quarter of modes no
/// longer contributes (relative tail below 1e-6).
bool tail_settled(const std::vector<double>& partials) {
  const double full = partials.back();
  if (!std::isfinite(full)) {
    return false;
  }
  const double tail = full - partials[2];
  return tail <= 1e-6 * std::max(full, 1e-300);
}

TrialReport run_trial_impl(const ExperimentContext& ctx, std::size_t trial) {
  const ExperimentConfig& config = ctx.config;
  const NoiseSpec spec = make_noise_spec(config, ctx.n);

  ObservedData observed;
  observed.time_grid = ctx.grid;
  observed.final_samples = observe_final(ctx.true_final, spec, trial);
  if (!ctx.true_source.empty()) {
    observed.source_paths =
        observe_source(ctx.true_source, spec, ctx.grid, trial);
  }
  observed.coefficient = observe_coefficient(ctx.coefficient_samples,
                                             config.a0, spec, ctx.grid, trial);

  TrialReport report;
  report.trial = trial;
  report.seed = config.seed;
  report.coefficient_within_bound = observed.coefficient.within_bound;
  report.realized_b0 = observed.coefficient.realized_b0;

  const std::vector<std::size_t> nodes =
      evaluation_nodes(ctx.grid, config.eval_times);
  report.times.reserve(nodes.size());
  for (std::size_t j : nodes) {
    report.times.push_back(ctx.grid[j]);
  }

  switch (config.method) {
    case Method::first_truncation: {
      const TruncationParams params = truncation_params_for(config, ctx.n);
      const RegularizedSolution sol =
          solve_first_regularizer(observed, ctx.instance, params, ctx.grid);
      report.picard_iterations = sol.picard_iterations;
      for (std::size_t j : nodes) {
        report.l2_errors.push_back(
            l2_distance(sol.states[j], ctx.truth.states[j]));
      }
      break;
    }
    case Method::second_truncation: {
      const TruncationParams params = truncation_params_for(config, ctx.n);
      const RegularizedSolution sol = solve_second_regularizer(
          observed.final_samples, ctx.instance, params, ctx.grid, config.cap);
      report.picard_iterations = sol.picard_iterations;
      for (std::size_t j : nodes) {
        report.l2_errors.push_back(
            l2_distance(sol.states[j], ctx.truth.states[j]));
      }
      break;
    }
    case Method::quasi_reversibility: {
      QRParams params =
          qr_params_for(config, ctx.n, ctx.instance.nonlinearity);
      params.b0 = observed.coefficient.realized_b0;
      const QRSolution sol =
          solve_qr(observed, ctx.instance, params, ctx.grid, config.cap);
      report.picard_iterations = sol.picard_iterations;
      const NormSpec hbeta = NormSpec::sobolev(config.beta / 2.0);
      for (std::size_t j : nodes) {
        const SpectralField diff =
            add_scaled(sol.states[j], ctx.truth.states[j], -1.0);
        report.l2_errors.push_back(norm(diff, NormSpec::l2()));
        report.hbeta_errors.push_back(norm(diff, hbeta));
      }
      if (sol.t_n) {
        report.error_at_t_n =
            qr_error_at_zero(sol, ctx.truth.states.front());
      }
      break;
    }
  }
  return report;
}

/// Sample mean and standard error of x -> x^2 along one metric.
void squared_mean_se(const std::vector<std::vector<double>>& per_trial,
                     std::size_t index, std::size_t trials, double& mean,
                     double& se) {
  double sum = 0.0;
  for (std::size_t r = 0; r < trials; ++r) {
    const double x = per_trial[r][index];
    sum += x * x;
  }
  mean = sum / static_cast<double>(trials);
  se = 0.0;
  if (trials >= 2) {
    double var = 0.0;
    for (std::size_t r = 0; r < trials; ++r) {
      const double x = per_trial[r][index];
      var += (x * x - mean) * (x * x - mean);
    }
    var /= static_cast<double>(trials - 1);
    se = std::sqrt(var / static_cast<double>(trials));
  }
}

}  // namespace

ExperimentContext make_context(const ExperimentConfig& config,
                               std::size_t n_override) {
  validate(config);
  ExperimentContext ctx;
  ctx.config = config;
  ctx.n = n_override == 0 ? config.n : n_override;
  ctx.instance = build_instance(config);
  validate(ctx.instance);
  ctx.grid = uniform_grid(config.T, config.grid_steps);
  ctx.truth = forward_solve(ctx.instance, ctx.grid, config.cap);
  ctx.true_final = synthesize(ctx.truth.states.back(), ctx.n);
  if (ctx.instance.source) {
    ctx.true_source.assign(ctx.n, std::vector<double>(ctx.grid.size(), 0.0));
    for (std::size_t j = 0; j < ctx.grid.size(); ++j) {
      const GridSamples g = synthesize(ctx.instance.source(ctx.grid[j]), ctx.n);
      for (std::size_t k = 0; k < ctx.n; ++k) {
        ctx.true_source[k][j] = g.values[k];
      }
    }
  }
  ctx.coefficient_samples.resize(ctx.grid.size());
  for (std::size_t j = 0; j < ctx.grid.size(); ++j) {
    ctx.coefficient_samples[j] = ctx.instance.coefficient(ctx.grid[j]);
  }
  return ctx;
}

NoiseSpec make_noise_spec(const ExperimentConfig& config, std::size_t n) {
  NoiseSpec spec;
  spec.sigma_k = constant_sigmas(n, config.noise_sigma);
  spec.V_max = config.V_max;
  spec.vartheta = config.vartheta;
  spec.eps = config.eps;
  spec.seed = config.seed;
  return spec;
}

TruncationParams truncation_params_for(const ExperimentConfig& config,
                                       std::size_t n) {
  TruncationParams params;
  params.n = n;
  params.sigma_rate = config.sigma_rate;
  params.M_n = config.M_n != 0
                   ? config.M_n
                   : choose_M_n(n, config.sigma_rate, config.T, config.beta);
  params.picard_tol = config.picard_tol;
  params.picard_max_iters = config.picard_max_iters;
  return params;
}

QRParams qr_params_for(const ExperimentConfig& config, std::size_t n,
                       const Nonlinearity& nonlinearity) {
  double Q = config.Q_n;
  if (Q == 0.0) {
    Q = choose_Q_n(n, config.T, nonlinearity).Q_n;
  }
  const std::size_t M =
      config.M_n != 0
          ? config.M_n
          : choose_M_n(n, config.sigma_rate, config.T, config.beta);
  QRParams params = make_qr_params(M, n, config.a0, config.beta, Q);
  params.picard_tol = config.picard_tol;
  params.picard_max_iters = config.picard_max_iters;
  return params;
}

AssumptionReport verify_assumptions(const Trajectory& truth,
                                    const ProblemInstance& instance,
                                    const SmoothnessAssumptions& claims,
                                    std::size_t cap) {
  if (truth.states.empty() || truth.states.size() != truth.time_grid.size()) {
    throw validation_error("trajectory must pair each time with a state");
  }
  if (cap < 1) {
    throw validation_error("cap must be at least 1");
  }
  AssumptionReport report;
  report.assumptions = claims;

  std::vector<SpectralField> g_path;
  if (instance.source) {
    g_path.reserve(truth.time_grid.size());
    for (double t : truth.time_grid) {
      g_path.push_back(instance.source(t));
    }
  }

  const double beta = instance.beta;
  const auto time_exponent = [&](std::size_t p, std::size_t j) {
    return 2.0 * mode_rate(p, beta) * truth.time_grid[j];
  };
  const auto zero_exponent = [](std::size_t, std::size_t) { return 0.0; };
  const double gevrey_scale = 2.0 * instance.T * instance.a0;
  const auto gevrey_exponent = [&](std::size_t p, std::size_t) {
    return gevrey_scale * mode_rate(p, beta);
  };

  const auto add_check = [&](const std::string& name, bool claimed,
                             std::vector<double> partials, bool extra_ok) {
    AssumptionCheck check;
    check.name = name;
    check.claimed = claimed;
    check.budget = partials.back();
    check.verified = tail_settled(partials) && extra_ok;
    check.partial_sums = std::move(partials);
    if (check.claimed && !check.verified) {
      report.all_verified = false;
    }
    report.checks.push_back(std::move(check));
    return report.checks.back().budget;
  };

  report.assumptions.P1 = add_check(
      "stability", claims.claim_stability,
      partial_sups(truth.states, cap, 0.0, time_exponent), true);
  report.assumptions.P2 = add_check(
      "weighted_stability", claims.claim_weighted,
      partial_sups(truth.states, cap, 2.0 * beta * claims.alpha,
                   time_exponent),
      claims.alpha > 0.0);
  report.assumptions.E2 = add_check(
      "source_smoothness", claims.claim_source,
      partial_sups(g_path, cap, 2.0 * claims.gamma_source, zero_exponent),
      g_path.empty() || claims.gamma_source > 1.0);
  add_check("gevrey_solution", claims.claim_gevrey,
            partial_sups(truth.states, cap, 4.0 * beta, gevrey_exponent),
            true);
  add_check("gevrey_source", claims.claim_gevrey,
            partial_sups(g_path, cap, 4.0 * beta, gevrey_exponent), true);

  if (instance.nonlinearity.globally_lipschitz && instance.nonlinearity.f) {
    double sup_l2 = 0.0;
    for (const SpectralField& s : truth.states) {
      sup_l2 = std::max(sup_l2, norm(s, NormSpec::l2()));
    }
    const double E =
        std::abs(instance.nonlinearity.f(0.0)) * std::sqrt(kPi) +
        std::max(instance.nonlinearity.lipschitz_K, 1.0) * sup_l2;
    report.assumptions.E1 = E / instance.T + E;
  }
  return report;
}

TrialReport run_trial(const ExperimentContext& context, std::size_t trial) {
  try {
    return run_trial_impl(context, trial);
  } catch (const validation_error& e) {
    throw validation_error("trial " + std::to_string(trial) + ": " + e.what());
  } catch (const numerical_error& e) {
    throw numerical_error("trial " + std::to_string(trial) + ": " + e.what());
  }
}

MiseResult estimate_mise(const ExperimentContext& context) {
  const std::size_t R = context.config.trials;
  std::vector<TrialReport> reports(R);

  std::size_t workers = context.config.workers;
  if (workers == 0) {
    workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  workers = std::min(workers, R);
  if (workers <= 1) {
    for (std::size_t r = 0; r < R; ++r) {
      reports[r] = run_trial(context, r);
    }
  } else {
    // Trials are keyed by index, so any partition of the index range gives
    // the same reports; workers write disjoint slots.
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < R; r += workers) {
            reports[r] = run_trial(context, r);
          }
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) {
      t.join();
    }
    if (first_error) {
      std::rethrow_exception(first_error);
    }
  }

  MiseResult out;
  out.trials = R;
  out.times = reports.front().times;
  out.min_realized_b0 = std::numeric_limits<double>::infinity();
  for (const TrialReport& r : reports) {
    if (!r.coefficient_within_bound) {
      ++out.flagged_trials;
    }
    out.min_realized_b0 = std::min(out.min_realized_b0, r.realized_b0);
  }

  std::vector<std::vector<double>> l2(R);
  std::vector<std::vector<double>> hbeta(R);
  for (std::size_t r = 0; r < R; ++r) {
    l2[r] = reports[r].l2_errors;
    hbeta[r] = reports[r].hbeta_errors;
  }
  const std::size_t count = out.times.size();
  out.mise.resize(count);
  out.std_error.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    squared_mean_se(l2, i, R, out.mise[i], out.std_error[i]);
  }
  if (!reports.front().hbeta_errors.empty()) {
    out.hbeta_mise.resize(count);
    out.hbeta_std_error.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      squared_mean_se(hbeta, i, R, out.hbeta_mise[i], out.hbeta_std_error[i]);
    }
  }
  if (reports.front().error_at_t_n) {
    std::vector<std::vector<double>> tn(R, std::vector<double>(1, 0.0));
    for (std::size_t r = 0; r < R; ++r) {
      if (!reports[r].error_at_t_n) {
        throw numerical_error("trial " + std::to_string(r) +
                              " lost the initial evaluation time");
      }
      tn[r][0] = *reports[r].error_at_t_n;
    }
    double mean = 0.0;
    double se = 0.0;
    squared_mean_se(tn, 0, R, mean, se);
    out.t_n_mise = mean;
    out.t_n_std_error = se;
  }
  return out;
}

BoundReport evaluate_bounds(const ExperimentContext& context,
                            double realized_b0) {
  const ExperimentConfig& config = context.config;
  BoundReport out;
  const std::vector<std::size_t> nodes =
      evaluation_nodes(context.grid, config.eval_times);
  out.times.reserve(nodes.size());
  for (std::size_t j : nodes) {
    out.times.push_back(context.grid[j]);
  }

  SmoothnessAssumptions claims;
  claims.alpha = config.alpha;
  claims.gamma_source = config.gamma_source;
  claims.delta = config.delta;
  if (config.bound_kind == "estimate1") {
    claims.claim_stability = true;
    claims.claim_source = static_cast<bool>(context.instance.source);
  } else if (config.bound_kind == "estimate2") {
    claims.claim_weighted = true;
    claims.claim_source = static_cast<bool>(context.instance.source);
  } else if (config.bound_kind == "qr") {
    claims.claim_gevrey = true;
  }
  out.assumption_report = verify_assumptions(context.truth, context.instance,
                                             claims, config.cap);
  out.assumptions_verified = out.assumption_report.all_verified;

  if (config.bound_kind == "qr") {
    QRParams params =
        qr_params_for(config, context.n, context.instance.nonlinearity);
    params.b0 = realized_b0;
    const Nonlinearity clamped =
        clamp_nonlinearity(context.instance.nonlinearity, params.Q_n);
    if (!clamped.globally_lipschitz) {
      throw validation_error(
          "the error bound needs a globally Lipschitz or clamped "
          "nonlinearity");
    }
    QRBoundInputs inputs;
    inputs.V_max = config.V_max;
    inputs.vartheta = config.vartheta;
    inputs.eps = config.eps;
    inputs.delta = config.delta;
    inputs.K_effective = clamped.lipschitz_K;
    const QRBounds bounds =
        evaluate_qr_bounds(context.truth, context.instance, params, inputs);
    out.l2_values.reserve(nodes.size());
    out.hbeta_values.reserve(nodes.size());
    for (std::size_t j : nodes) {
      out.l2_values.push_back(bounds.l2_values[j]);
      out.hbeta_values.push_back(bounds.hbeta_values[j]);
    }
    const double Mb = std::pow(static_cast<double>(params.M_n), config.beta);
    if (std::exp(-config.T * Mb) < config.T) {
      const double du = time_derivative_sup(context.truth, context.instance);
      out.t_n_value =
          qr_initial_time_rhs(bounds.Phi, inputs.K_effective, params.M_n,
                              config.beta, config.T, du);
    }
    return out;
  }

  const TruncationParams params = truncation_params_for(config, context.n);
  TruncationBoundInputs inputs;
  inputs.V_max = config.V_max;
  inputs.vartheta = config.vartheta;
  inputs.gamma_source = config.gamma_source;
  inputs.alpha = config.alpha;
  inputs.gamma_u = config.gamma_u;
  inputs.P1 = config.P1 > 0.0 ? config.P1 : out.assumption_report.assumptions.P1;
  inputs.P2 = config.P2 > 0.0 ? config.P2 : out.assumption_report.assumptions.P2;
  inputs.E2_source =
      config.E2 > 0.0
          ? config.E2
          : (context.instance.source ? out.assumption_report.assumptions.E2
                                     : 0.0);
  TruncationBoundKind kind = TruncationBoundKind::first_estimate1;
  if (config.bound_kind == "estimate2") {
    kind = TruncationBoundKind::first_estimate2;
  } else if (config.bound_kind == "second") {
    kind = TruncationBoundKind::second;
  }
  const TruncationBound bound = evaluate_truncation_bound(
      kind, context.truth, context.instance, params, inputs);
  out.l2_values.reserve(nodes.size());
  for (std::size_t j : nodes) {
    out.l2_values.push_back(bound.values[j]);
  }
  return out;
}

double fit_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw validation_error("slope fit needs matching abscissae and values");
  }
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) {
    return 0.0;
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) /
                    static_cast<double>(lx.size());
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) /
                    static_cast<double>(ly.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return den > 0.0 ? num / den : 0.0;
}

SweepResult rate_sweep(const ExperimentConfig& config) {
  if (config.sweep_n.size() < 3) {
    throw validation_error("rate sweep needs at least 3 sample counts");
  }
  if (config.eval_times.empty()) {
    throw validation_error("rate sweep needs eval.times");
  }
  SweepResult out;
  out.noise_free_floor = config.noise_sigma == 0.0 &&
                         config.vartheta == 0.0 && config.eps == 0.0;

  std::vector<std::vector<double>> mise_by_time;
  std::vector<std::vector<double>> se_by_time;
  std::vector<double> ns;
  for (std::size_t n : config.sweep_n) {
    const ExperimentContext ctx = make_context(config, n);
    const MiseResult mise = estimate_mise(ctx);
    const BoundReport bounds = evaluate_bounds(ctx, mise.min_realized_b0);
    const std::size_t M =
        config.method == Method::quasi_reversibility
            ? qr_params_for(config, n, ctx.instance.nonlinearity).M_n
            : truncation_params_for(config, n).M_n;
    if (out.times.empty()) {
      out.times = mise.times;
      mise_by_time.assign(out.times.size(), {});
      se_by_time.assign(out.times.size(), {});
    }
    for (std::size_t i = 0; i < out.times.size(); ++i) {
      SweepPoint point;
      point.n = n;
      point.M_n = M;
      point.t = mise.times[i];
      point.mise = mise.mise[i];
      point.std_error = mise.std_error[i];
      point.bound = bounds.l2_values[i];
      out.points.push_back(point);
      mise_by_time[i].push_back(mise.mise[i]);
      se_by_time[i].push_back(mise.std_error[i]);
    }
    ns.push_back(static_cast<double>(n));
  }

  out.slopes.resize(out.times.size());
  out.predicted.resize(out.times.size());
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    out.slopes[i] = fit_log_slope(ns, mise_by_time[i]);
    out.predicted[i] = -config.sigma_rate * out.times[i] / config.T;
    for (std::size_t k = 0; k + 1 < mise_by_time[i].size(); ++k) {
      const double slack =
          3.0 * (se_by_time[i][k] + se_by_time[i][k + 1]);
      if (mise_by_time[i][k + 1] > mise_by_time[i][k] + slack) {
        out.degenerate_fit = true;
      }
    }
  }
  return out;
}

void write_trial_csv(const std::string& path, const TrialReport& report) {
  CsvWriter csv(path);
  csv.comment("trial = " + std::to_string(report.trial));
  csv.comment("seed = " + std::to_string(report.seed));
  csv.comment("picard_iterations = " +
              std::to_string(report.picard_iterations));
  csv.comment("coefficient_within_bound = " +
              std::string(report.coefficient_within_bound ? "1" : "0"));
  csv.comment("realized_b0 = " + CsvWriter::num(report.realized_b0));
  csv.header({"trial", "t", "metric", "value"});
  const std::string trial = std::to_string(report.trial);
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    csv.row({trial, CsvWriter::num(report.times[i]), "l2_error",
             CsvWriter::num(report.l2_errors[i])});
  }
  for (std::size_t i = 0; i < report.hbeta_errors.size(); ++i) {
    csv.row({trial, CsvWriter::num(report.times[i]), "hbeta_error",
             CsvWriter::num(report.hbeta_errors[i])});
  }
  if (report.error_at_t_n) {
    csv.row({trial, "", "error_at_t_n", CsvWriter::num(*report.error_at_t_n)});
  }
}

void write_mise_csv(const std::string& path, const MiseResult& result,
                    const BoundReport& bounds) {
  CsvWriter csv(path);
  csv.comment("trials = " + std::to_string(result.trials));
  csv.comment("flagged_trials = " + std::to_string(result.flagged_trials));
  csv.header({"t", "metric", "mise", "stderr", "bound"});
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    const double bound =
        i < bounds.l2_values.size() ? bounds.l2_values[i] : inf;
    csv.row({CsvWriter::num(result.times[i]), "l2",
             CsvWriter::num(result.mise[i]),
             CsvWriter::num(result.std_error[i]), CsvWriter::num(bound)});
  }
  for (std::size_t i = 0; i < result.hbeta_mise.size(); ++i) {
    const double bound =
        i < bounds.hbeta_values.size() ? bounds.hbeta_values[i] : inf;
    csv.row({CsvWriter::num(result.times[i]), "hbeta",
             CsvWriter::num(result.hbeta_mise[i]),
             CsvWriter::num(result.hbeta_std_error[i]),
             CsvWriter::num(bound)});
  }
  if (result.t_n_mise) {
    csv.row({"", "t_n", CsvWriter::num(*result.t_n_mise),
             CsvWriter::num(result.t_n_std_error.value_or(0.0)),
             CsvWriter::num(bounds.t_n_value.value_or(inf))});
  }
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  CsvWriter csv(path);
  csv.comment("degenerate_fit = " +
              std::string(result.degenerate_fit ? "1" : "0"));
  csv.comment("noise_free_floor = " +
              std::string(result.noise_free_floor ? "1" : "0"));
  csv.header({"n", "M_n", "t", "mise", "stderr", "bound", "slope"});
  for (const SweepPoint& point : result.points) {
    double slope = 0.0;
    for (std::size_t i = 0; i < result.times.size(); ++i) {
      if (result.times[i] == point.t) {
        slope = result.slopes[i];
        break;
      }
    }
    csv.row({CsvWriter::num(point.n), CsvWriter::num(point.M_n),
             CsvWriter::num(point.t), CsvWriter::num(point.mise),
             CsvWriter::num(point.std_error), CsvWriter::num(point.bound),
             CsvWriter::num(slope)});
  }
}

namespace {

nlohmann::json assumption_json(const AssumptionReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const AssumptionCheck& check : report.checks) {
    checks.push_back({{"name", check.name},
                      {"claimed", check.claimed},
                      {"verified", check.verified},
                      {"budget", check.budget},
                      {"partial_sums", check.partial_sums}});
  }
  return {{"all_verified", report.all_verified}, {"checks", checks}};
}

}  // namespace

void write_mise_json(const std::string& path, const ExperimentConfig& config,
                     const MiseResult& result, const BoundReport& bounds) {
  nlohmann::json j;
  j["id"] = config.id;
  j["method"] = method_name(config.method);
  j["n"] = config.n;
  j["seed"] = config.seed;
  j["trials"] = result.trials;
  j["flagged_trials"] = result.flagged_trials;
  j["times"] = result.times;
  j["mise"] = result.mise;
  j["stderr"] = result.std_error;
  if (!result.hbeta_mise.empty()) {
    j["hbeta_mise"] = result.hbeta_mise;
    j["hbeta_stderr"] = result.hbeta_std_error;
  }
  if (result.t_n_mise) {
    j["t_n_mise"] = *result.t_n_mise;
    j["t_n_stderr"] = result.t_n_std_error.value_or(0.0);
  }
  j["bound_l2"] = bounds.l2_values;
  if (!bounds.hbeta_values.empty()) {
    j["bound_hbeta"] = bounds.hbeta_values;
  }
  if (bounds.t_n_value) {
    j["bound_t_n"] = *bounds.t_n_value;
  }
  j["assumptions"] = assumption_json(bounds.assumption_report);
  std::ofstream out(path);
  if (!out) {
    throw validation_error("cannot open report file '" + path + "'");
  }
  out << j.dump(2) << "\n";
}

void write_trial_json(const std::string& path, const ExperimentConfig& config,
                      const TrialReport& report) {
  nlohmann::json j;
  j["id"] = config.id;
  j["method"] = method_name(config.method);
  j["trial"] = report.trial;
  j["seed"] = report.seed;
  j["times"] = report.times;
  j["l2_errors"] = report.l2_errors;
  if (!report.hbeta_errors.empty()) {
    j["hbeta_errors"] = report.hbeta_errors;
  }
  if (report.error_at_t_n) {
    j["error_at_t_n"] = *report.error_at_t_n;
  }
  j["picard_iterations"] = report.picard_iterations;
  j["coefficient_within_bound"] = report.coefficient_within_bound;
  j["realized_b0"] = report.realized_b0;
  std::ofstream out(path);
  if (!out) {
    throw validation_error("cannot open report file '" + path + "'");
  }
  out << j.dump(2) << "\n";
}

std::vector<InvariantResult> run_invariant_suite() {
  std::vector<InvariantResult> results;
  const auto check = [&results](const std::string& name, auto&& body) {
    InvariantResult r;
    r.name = name;
    try {
      r.detail = body();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = e.what();
    }
    results.push_back(std::move(r));
  };

  check("rng_keystream_reference", [] {
    const CounterRng rng(0);
    const std::array<std::uint64_t, 4> block =
        rng.block({1ULL, 0ULL, 0ULL, 0ULL});
    const std::array<std::uint64_t, 4> expected = {
        0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL,
        0x907d7a052fd5b4dcULL};
    return block == expected ? std::string{}
                             : std::string("keystream mismatch");
  });

  check("rng_addressed_determinism", [] {
    const CounterRng rng(42);
    const double a =
        rng.normal(StreamPurpose::final_observation, 3, 7, 11);
    const double b =
        rng.normal(StreamPurpose::final_observation, 3, 7, 11);
    const double c =
        rng.normal(StreamPurpose::final_observation, 4, 7, 11);
    if (a != b) {
      return std::string("same address produced different draws");
    }
    if (a == c) {
      return std::string("distinct trials produced identical draws");
    }
    return std::string{};
  });

  check("aliasing_identity", [] {
    const CounterRng rng(7);
    SpectralField field(24);
    for (std::size_t p = 0; p <= 24; ++p) {
      field.coeffs[p] =
          2.0 * rng.uniform(StreamPurpose::final_observation, 0, p, 0) - 1.0;
    }
    const std::size_t n = 8;
    const GridSamples samples = synthesize(field, n);
    const double kpi = std::acos(-1.0);
    for (std::size_t p = 0; p < n; ++p) {
      const double exact =
          p == 0 ? field.at(0) / std::sqrt(kpi) : field.at(p);
      const double reconstructed =
          discrete_coefficient(samples, p) - aliasing_tail(field, n, p);
      if (std::abs(exact - reconstructed) > 1e-9) {
        return "mode " + std::to_string(p) + " off by " +
               std::to_string(std::abs(exact - reconstructed));
      }
    }
    return std::string{};
  });

  check("projection_exact_bandlimited", [] {
    SpectralField field(5);
    field.coeffs = {0.3, -1.0, 0.5, 0.0, 0.25, -0.125};
    const SpectralField back = project(synthesize(field, 64), 5);
    for (std::size_t p = 0; p <= 5; ++p) {
      if (std::abs(back.at(p) - field.at(p)) > 1e-12) {
        return "mode " + std::to_string(p) + " not reproduced";
      }
    }
    return std::string{};
  });

  check("forward_mild_consistency", [] {
    ProblemInstance instance;
    instance.beta = 1.0;
    instance.T = 0.2;
    instance.coefficient = [](double) { return 1.0; };
    instance.a0 = 1.0;
    instance.nonlinearity = nonlinearity_by_name("sin");
    instance.initial_state = SpectralField::mode(1);
    const Trajectory traj =
        forward_solve(instance, uniform_grid(instance.T, 400), 8);
    const double residual = mild_residual(traj, instance);
    return residual <= 1e-4
               ? std::string{}
               : "mild residual " + std::to_string(residual);
  });

  check("linear_truncation_recovery", [] {
    ProblemInstance instance;
    instance.beta = 1.0;
    instance.T = 0.3;
    instance.coefficient = [](double) { return 1.0; };
    instance.a0 = 1.0;
    instance.nonlinearity = nonlinearity_by_name("zero");
    instance.initial_state = add_scaled(SpectralField::mode(1),
                                        SpectralField::mode(2), 0.3);
    const std::vector<double> grid = uniform_grid(instance.T, 32);
    const Trajectory truth = forward_solve(instance, grid, 8);
    ObservedData observed;
    observed.time_grid = grid;
    observed.final_samples = synthesize(truth.states.back(), 32);
    TruncationParams params;
    params.M_n = 3;
    params.n = 32;
    const RegularizedSolution sol =
        solve_first_regularizer(observed, instance, params, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      for (std::size_t p = 0; p <= params.M_n; ++p) {
        if (std::abs(sol.states[j].at(p) - truth.states[j].at(p)) > 1e-9) {
          return "node " + std::to_string(j) + " mode " + std::to_string(p) +
                 " not recovered";
        }
      }
    }
    return std::string{};
  });

  check("qr_head_tail_identity", [] {
    const QRParams params = make_qr_params(4, 100, 2.0, 0.8);
    const CounterRng rng(11);
    SpectralField field(12);
    for (std::size_t p = 0; p <= 12; ++p) {
      field.coeffs[p] =
          2.0 * rng.uniform(StreamPurpose::source_noise, 0, p, 0) - 1.0;
    }
    const SpectralField tail =
        head_tail_apply(field, HeadTail::tail, params, 0.8);
    const SpectralField head =
        head_tail_apply(field, HeadTail::head, params, 0.8);
    const SpectralField combined = add_scaled(head, tail, params.a0);
    const SpectralField reference =
        add_scaled(SpectralField(12), frac_laplacian_apply(field, 0.8),
                   params.a0);
    const double gap = l2_distance(combined, reference);
    return gap <= 1e-12 ? std::string{}
                        : "identity gap " + std::to_string(gap);
  });

  check("qr_constant_coefficient_closed_form", [] {
    QRParams params = make_qr_params(3, 100, 2.0, 1.0);
    SpectralField w_bar(5);
    w_bar.coeffs[1] = 1.0;
    w_bar.coeffs[5] = 1.0;
    const std::vector<double> grid = uniform_grid(1.0, 64);
    const std::vector<double> a_path(grid.size(), 1.0);
    const QRSolution sol =
        solve_qr_mild(w_bar, {}, a_path, nonlinearity_by_name("zero"), 1.0,
                      params, grid, 5);
    const double head_gap = std::abs(sol.states.front().at(1) - std::exp(1.0));
    const double tail_gap =
        std::abs(sol.states.front().at(5) - std::exp(-25.0));
    if (head_gap > 1e-9 || tail_gap > 1e-9) {
      return "closed-form gaps " + std::to_string(head_gap) + ", " +
             std::to_string(tail_gap);
    }
    return std::string{};
  });

  check("initial_time_root", [] {
    const double t = solve_t_n(10, 1.0, 1.0);
    const double residual = std::abs(std::exp(-10.0 * t) - t);
    if (residual > 1e-12) {
      return "root residual " + std::to_string(residual);
    }
    if (t > std::pow(10.0, -0.5)) {
      return std::string("root exceeds the M^{-beta/2} ceiling");
    }
    return std::string{};
  });

  check("cutoff_selection_examples", [] {
    if (choose_M_n(100, 0.9, 0.1, 0.5) != 20) {
      return std::string("cutoff for (100, 0.9, 0.1, 0.5) is not 20");
    }
    if (choose_M_n(1000, 0.5, 1.0, 1.0) != 1) {
      return std::string("cutoff for (1000, 0.5, 1, 1) is not 1");
    }
    return std::string{};
  });

  check("clamp_budget_selection", [] {
    Nonlinearity linear_profile;
    linear_profile.name = "linear_profile";
    linear_profile.f = [](double u) { return u; };
    linear_profile.globally_lipschitz = false;
    linear_profile.local_K = [](double q) { return q; };
    const QnChoice choice = choose_Q_n(1000000, 1.0, linear_profile);
    const double expected =
        0.5 * std::log(std::log(1.0e6));
    if (!choice.budget_met || std::abs(choice.Q_n - expected) > 1e-4) {
      return "clamp level " + std::to_string(choice.Q_n) + " vs expected " +
             std::to_string(expected);
    }
    return std::string{};
  });

  check("config_round_trip", [] {
    const ConfigMap map = parse_config_text(
        "problem.beta = 0.75\nmethod = quasi_reversibility\n# note\n"
        "trials = 3\n");
    const ExperimentConfig config = config_from_map(map);
    if (config.beta != 0.75 ||
        config.method != Method::quasi_reversibility || config.trials != 3) {
      return std::string("parsed values do not match the text");
    }
    try {
      (void)config_from_map(parse_config_text("no.such.key = 1\n"));
      return std::string("unknown key was accepted");
    } catch (const validation_error&) {
      return std::string{};
    }
  });

  check("csv_number_round_trip", [] {
    if (CsvWriter::num(0.1) != "0.1" ||
        std::stod(CsvWriter::num(1.0 / 3.0)) != 1.0 / 3.0) {
      return std::string("doubles do not round-trip");
    }
    if (CsvWriter::num(std::numeric_limits<double>::quiet_NaN()) != "nan") {
      return std::string("nan spelling changed");
    }
    return std::string{};
  });

  check("noise_zero_amplitude_identity", [] {
    GridSamples truth;
    truth.n = 16;
    truth.values.assign(16, 1.5);
    NoiseSpec spec;
    spec.sigma_k = constant_sigmas(16, 0.0);
    spec.V_max = 0.5;
    const GridSamples observed = observe_final(truth, spec, 0);
    for (std::size_t k = 0; k < 16; ++k) {
      if (observed.values[k] != truth.values[k]) {
        return std::string("zero-amplitude noise altered a sample");
      }
    }
    const std::vector<double> grid = uniform_grid(1.0, 4);
    const std::vector<double> a(grid.size(), 0.8);
    const CoefficientObservation obs =
        observe_coefficient(a, 1.0, spec, grid, 0);
    if (obs.path != a || !obs.within_bound) {
      return std::string("zero-amplitude coefficient observation changed");
    }
    return std::string{};
  });

  return results;
}

}  // namespace fracback
