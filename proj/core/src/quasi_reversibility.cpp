#include "fracback/quasi_reversibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracback/errors.hpp"
#include "fracback/forward.hpp"
#include "fracback/truncation.hpp"

namespace fracback {

namespace {

constexpr double kExpGuard = 700.0;
const double kPi = std::acos(-1.0);

double mode_rate(std::size_t p, double beta) {
  return p == 0 ? 0.0 : std::pow(static_cast<double>(p), 2.0 * beta);
}

void check_solver_grid(const std::vector<double>& grid, double T) {
  if (grid.size() < 2) {
    throw validation_error("time grid needs at least two nodes");
  }
  const double tol = 1e-12 * std::max(1.0, T);
  if (std::abs(grid.front()) > tol || std::abs(grid.back() - T) > tol) {
    throw validation_error("time grid must run from 0 to T");
  }
  for (std::size_t j = 1; j < grid.size(); ++j) {
    if (!(grid[j] > grid[j - 1])) {
      throw validation_error("time grid must be strictly increasing");
    }
  }
}

void check_qr_params(const QRParams& params, double T, double beta) {
  if (params.M_n < 1) {
    throw validation_error("cutoff M_n must be positive");
  }
  if (!(params.a0 > 0.0)) {
    throw validation_error("coefficient bound a0 must be positive");
  }
  if (!(params.p_star > 0.0)) {
    throw validation_error(
        "head/tail threshold p_star is unset; build params with "
        "make_qr_params");
  }
  if (!(params.picard_tol > 0.0)) {
    throw validation_error("picard_tol must be positive");
  }
  if (params.picard_max_iters < 1) {
    throw validation_error("picard_max_iters must be at least 1");
  }
  const double exponent = T * mode_rate(params.M_n, beta);
  if (exponent > kExpGuard) {
    throw validation_error(
        "amplification exponent T M_n^{2 beta} = " + std::to_string(exponent) +
        " exceeds the floating guard; shrink M_n or T");
  }
}

/// Per-mode generator of the regularized problem at coefficient value a:
/// head modes keep a p^{2 beta}, tail modes keep (a - a0) p^{2 beta}.
double generator(std::size_t p, double a, const QRParams& params,
                 double beta) {
  const double rate = mode_rate(p, beta);
  if (static_cast<double>(p) >= params.p_star) {
    return (a - params.a0) * rate;
  }
  return a * rate;
}

double sup_l2_increment(const std::vector<SpectralField>& a,
                        const std::vector<SpectralField>& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    worst = std::max(worst, l2_distance(a[j], b[j]));
  }
  return worst;
}

}  // namespace

QRParams make_qr_params(std::size_t M_n, std::size_t n, double a0, double beta,
                        double Q_n) {
  if (M_n < 1) {
    throw validation_error("cutoff M_n must be positive");
  }
  if (!(a0 > 0.0)) {
    throw validation_error("coefficient bound a0 must be positive");
  }
  if (!(beta > 0.5)) {
    throw validation_error("fractional order beta must exceed 1/2");
  }
  if (!(Q_n > 0.0)) {
    throw validation_error("clamp level Q_n must be positive");
  }
  QRParams params;
  params.M_n = M_n;
  params.n = n;
  params.Q_n = Q_n;
  params.a0 = a0;
  params.p_star =
      static_cast<double>(M_n) * std::pow(a0, -1.0 / (2.0 * beta));
  return params;
}

SpectralField data_approx_final(const GridSamples& noisy_final,
                                std::size_t M_n) {
  if (M_n < 1 || M_n >= noisy_final.n) {
    throw validation_error("cutoff must satisfy 0 < M_n < n");
  }
  return project(noisy_final, M_n);
}

std::vector<SpectralField> data_approx_source(
    const std::vector<std::vector<double>>& source_paths, std::size_t M_n) {
  const std::size_t n = source_paths.size();
  if (n < 2 || M_n < 1 || M_n >= n) {
    throw validation_error("source paths must cover n > M_n nodes");
  }
  const std::size_t count = source_paths.front().size();
  for (const auto& series : source_paths) {
    if (series.size() != count) {
      throw validation_error("every source series must share one time grid");
    }
  }
  std::vector<SpectralField> out(count);
  GridSamples slice;
  slice.n = n;
  slice.values.resize(n);
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      slice.values[k] = source_paths[k][j];
    }
    out[j] = project(slice, M_n);
  }
  return out;
}

SpectralField head_tail_apply(const SpectralField& field, HeadTail which,
                              const QRParams& params, double beta) {
  if (!(params.p_star > 0.0)) {
    throw validation_error(
        "head/tail threshold p_star is unset; build params with "
        "make_qr_params");
  }
  SpectralField out(field.cap());
  for (std::size_t p = 0; p <= field.cap(); ++p) {
    const bool tail = static_cast<double>(p) >= params.p_star;
    if (tail != (which == HeadTail::tail)) {
      continue;
    }
    const double scale = which == HeadTail::head ? params.a0 : 1.0;
    out.coeffs[p] = scale * mode_rate(p, beta) * field.at(p);
  }
  return out;
}

QRSolution solve_qr_mild(const SpectralField& w_bar,
                         const std::vector<SpectralField>& g_bar_path,
                         const std::vector<double>& a_bar_path,
                         const Nonlinearity& F, double beta,
                         const QRParams& params,
                         const std::vector<double>& grid, std::size_t cap) {
  if (!(beta > 0.5)) {
    throw validation_error("fractional order beta must exceed 1/2");
  }
  const double T = grid.empty() ? 0.0 : grid.back();
  check_solver_grid(grid, T);
  if (!(T > 0.0)) {
    throw validation_error("final time T must be positive");
  }
  check_qr_params(params, T, beta);
  if (a_bar_path.size() != grid.size()) {
    throw validation_error(
        "observed coefficient path must live on the solve grid");
  }
  for (double a : a_bar_path) {
    if (!std::isfinite(a)) {
      throw validation_error("observed coefficient path must be finite");
    }
  }
  if (!g_bar_path.empty() && g_bar_path.size() != grid.size()) {
    throw validation_error("source fields must pair one entry per grid node");
  }
  if (!F.f) {
    throw validation_error("nonlinearity '" + F.name + "' has no function");
  }

  const std::size_t m = grid.size() - 1;

  // Reversed time s_i = T - t_{m-i}; node i carries coefficient value
  // abar(t_{m-i}) and source field g_bar(t_{m-i}).
  std::vector<double> s(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    s[i] = T - grid[m - i];
  }

  // Cumulative generator integrals A_p(s_i) by trapezoid; exact exponential
  // factors of the head/tail splitting. Within the coefficient bound the
  // head exponent stays below T M_n^{2 beta} and the tail decays, so the
  // runtime guard only trips when the observed path escapes the bound.
  std::vector<std::vector<double>> A(cap + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t p = 0; p <= cap; ++p) {
    for (std::size_t i = 1; i <= m; ++i) {
      const double k_prev = generator(p, a_bar_path[m - (i - 1)], params, beta);
      const double k_cur = generator(p, a_bar_path[m - i], params, beta);
      A[p][i] = A[p][i - 1] + 0.5 * (s[i] - s[i - 1]) * (k_prev + k_cur);
      if (A[p][i] > kExpGuard) {
        throw numerical_error(
            "realized amplification exponent " + std::to_string(A[p][i]) +
            " at mode " + std::to_string(p) + " exceeds the floating guard");
      }
    }
  }

  // Data term D_p(s_i) = e^{A_p(s_i)} w_bar_p
  //                      - int_0^{s_i} e^{A_p(s_i) - A_p(sigma)} g_p dsigma,
  // the integral by the prefix recurrence
  // G_i = e^{dA} G_{i-1} + (ds/2)(e^{dA} y_{i-1} + y_i).
  std::vector<SpectralField> data(m + 1, SpectralField(cap));
  for (std::size_t p = 0; p <= cap; ++p) {
    double g_weighted = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i > 0) {
        const double ds = s[i] - s[i - 1];
        const double grow = std::exp(A[p][i] - A[p][i - 1]);
        const double y_prev =
            g_bar_path.empty() ? 0.0 : g_bar_path[m - (i - 1)].at(p);
        const double y_cur = g_bar_path.empty() ? 0.0 : g_bar_path[m - i].at(p);
        g_weighted = grow * g_weighted + 0.5 * ds * (grow * y_prev + y_cur);
      }
      data[i].coeffs[p] = std::exp(A[p][i]) * w_bar.at(p) - g_weighted;
    }
  }

  // Picard iteration on the mild form, subtracting the same weighted prefix
  // integral of the nonlinearity; plain sup-in-time L2 stopping.
  std::vector<SpectralField> states = data;
  std::size_t iterations = 0;
  double final_increment = 0.0;
  double final_ratio = 0.0;
  double prev_inc = -1.0;
  std::vector<std::vector<double>> rhs(cap + 1, std::vector<double>(m + 1));
  bool converged = false;
  for (std::size_t it = 1; it <= params.picard_max_iters; ++it) {
    for (std::size_t i = 0; i <= m; ++i) {
      const SpectralField f = apply_pointwise(F, states[i], cap);
      for (std::size_t p = 0; p <= cap; ++p) {
        rhs[p][i] = f.coeffs[p];
      }
    }
    std::vector<SpectralField> next(m + 1, SpectralField(cap));
    for (std::size_t p = 0; p <= cap; ++p) {
      double f_weighted = 0.0;
      for (std::size_t i = 0; i <= m; ++i) {
        if (i > 0) {
          const double ds = s[i] - s[i - 1];
          const double grow = std::exp(A[p][i] - A[p][i - 1]);
          f_weighted = grow * f_weighted +
                       0.5 * ds * (grow * rhs[p][i - 1] + rhs[p][i]);
        }
        next[i].coeffs[p] = data[i].at(p) - f_weighted;
      }
    }
    const double inc = sup_l2_increment(next, states);
    states = std::move(next);
    iterations = it;
    final_increment = inc;
    final_ratio = prev_inc > 0.0 ? inc / prev_inc : 0.0;
    if (inc <= params.picard_tol) {
      converged = true;
      break;
    }
    prev_inc = inc;
  }
  if (!converged) {
    throw numerical_error(
        "fixed-point iteration cap " + std::to_string(params.picard_max_iters) +
        " exceeded; last increment " + std::to_string(final_increment) +
        ", contraction ratio " + std::to_string(final_ratio));
  }

  QRSolution sol;
  sol.time_grid = grid;
  sol.states.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    sol.states[j] = std::move(states[m - j]);
  }
  sol.picard_iterations = iterations;
  sol.final_increment = final_increment;
  sol.final_contraction_ratio = final_ratio;
  const double Mb = std::pow(static_cast<double>(params.M_n), beta);
  if (std::exp(-T * Mb) < T) {
    sol.t_n = solve_t_n(params.M_n, beta, T);
  }
  return sol;
}

QRSolution solve_qr(const ObservedData& observed,
                    const ProblemInstance& instance, const QRParams& params,
                    const std::vector<double>& grid, std::size_t cap) {
  validate(instance);
  check_solver_grid(grid, instance.T);
  if (observed.final_samples.n != params.n) {
    throw validation_error("observed sample count does not match params.n");
  }
  if (params.M_n >= params.n) {
    throw validation_error("cutoff must satisfy 0 < M_n < n");
  }
  if (cap < params.M_n) {
    throw validation_error("cap must be at least M_n");
  }

  const SpectralField w_bar =
      data_approx_final(observed.final_samples, params.M_n);

  std::vector<SpectralField> g_bar;
  if (!observed.source_paths.empty()) {
    if (observed.source_paths.front().size() != grid.size()) {
      throw validation_error(
          "observed source paths must live on the solve grid");
    }
    g_bar = data_approx_source(observed.source_paths, params.M_n);
  }

  std::vector<double> a_bar = observed.coefficient.path;
  if (a_bar.empty()) {
    a_bar.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      a_bar[j] = instance.coefficient(grid[j]);
    }
  } else if (a_bar.size() != grid.size()) {
    throw validation_error(
        "observed coefficient path must live on the solve grid");
  }

  const Nonlinearity clamped =
      clamp_nonlinearity(instance.nonlinearity, params.Q_n);
  return solve_qr_mild(w_bar, g_bar, a_bar, clamped, instance.beta, params,
                       grid, cap);
}

double solve_t_n(std::size_t M_n, double beta, double T) {
  if (M_n < 1) {
    throw validation_error("cutoff M_n must be positive");
  }
  if (!(beta > 0.5)) {
    throw validation_error("fractional order beta must exceed 1/2");
  }
  if (!(T > 0.0)) {
    throw validation_error("final time T must be positive");
  }
  const double Mb = std::pow(static_cast<double>(M_n), beta);
  if (!(std::exp(-T * Mb) < T)) {
    throw validation_error(
        "initial evaluation time needs M_n^beta > (1/T) log(1/T)");
  }
  // f(t) = e^{-t M^beta} - t is strictly decreasing with f(0) = 1 > 0 and
  // f(T) < 0, so bisection converges to the unique root.
  double lo = 0.0;
  double hi = T;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = std::exp(-mid * Mb) - mid;
    if (std::abs(f) <= 1e-12) {
      return mid;
    }
    (f > 0.0 ? lo : hi) = mid;
  }
  throw numerical_error("bisection for the initial evaluation time stalled");
}

QnChoice choose_Q_n(std::size_t n, double T, const Nonlinearity& F) {
  if (n < 3) {
    throw validation_error("clamp selection requires n >= 3");
  }
  if (!(T > 0.0)) {
    throw validation_error("T must be positive");
  }
  QnChoice choice;
  choice.budget =
      std::log(std::log(static_cast<double>(n))) / (2.0 * T);
  if (F.globally_lipschitz) {
    choice.Q_n = std::numeric_limits<double>::infinity();
    choice.budget_met = F.lipschitz_K <= choice.budget;
    return choice;
  }
  if (!F.local_K) {
    throw validation_error("nonlinearity '" + F.name +
                           "' declares no Lipschitz profile");
  }

  // Largest Q with K(Q) <= target on the nondecreasing profile. When even
  // the profile's minimum exceeds the budget, fall back to the largest Q
  // still attaining that minimum and report the miss.
  const double k_min = F.local_K(1e-8);
  choice.budget_met = k_min <= choice.budget;
  const double target =
      choice.budget_met ? choice.budget : k_min * (1.0 + 1e-9);

  double lo = 1e-8;
  double hi = 1.0;
  while (F.local_K(hi) <= target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e30) {
      choice.Q_n = std::numeric_limits<double>::infinity();
      return choice;
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F.local_K(mid) <= target ? lo : hi) = mid;
  }
  choice.Q_n = lo;
  return choice;
}

QRBounds evaluate_qr_bounds(const Trajectory& truth,
                            const ProblemInstance& instance,
                            const QRParams& params,
                            const QRBoundInputs& inputs) {
  if (truth.states.empty() || truth.states.size() != truth.time_grid.size()) {
    throw validation_error("trajectory must pair each time with a state");
  }
  if (!(inputs.delta > 1.0)) {
    throw validation_error("smoothness order delta must exceed 1");
  }
  if (params.n == 0) {
    throw validation_error("sample count n must be positive");
  }
  if (params.M_n < 1) {
    throw validation_error("cutoff M_n must be positive");
  }
  const double T = instance.T;
  const double beta = instance.beta;
  const double M = static_cast<double>(params.M_n);
  const double rate = mode_rate(params.M_n, beta);
  if (2.0 * T * rate > kExpGuard) {
    throw validation_error(
        "amplification exponent 2 T M_n^{2 beta} = " +
        std::to_string(2.0 * T * rate) + " exceeds the floating guard");
  }

  QRBounds out;
  out.time_grid = truth.time_grid;

  const NormSpec vtilde = NormSpec::gevrey(T, params.a0, beta);
  const auto safe_norm = [&out](const SpectralField& f, const NormSpec& spec) {
    try {
      return norm(f, spec);
    } catch (const numerical_error&) {
      out.norms_finite = false;
      return std::numeric_limits<double>::infinity();
    }
  };

  out.u_T_vtilde = safe_norm(truth.states.back(), vtilde);
  for (const SpectralField& state : truth.states) {
    out.u_vtilde_sup = std::max(out.u_vtilde_sup, safe_norm(state, vtilde));
    out.u_h2beta_sup =
        std::max(out.u_h2beta_sup, norm(state, NormSpec::sobolev(beta)));
  }

  // Aliasing constants at smoothness delta, and the source's norms on the
  // trajectory grid (zero when there is no source).
  const double factor =
      std::max(2.0 / std::pow(4.0, inputs.delta),
               std::sqrt(2.0) / (std::sqrt(kPi) * std::pow(2.0, inputs.delta))) *
      std::riemann_zeta(inputs.delta);
  out.C_bar =
      factor * norm(truth.states.back(), NormSpec::sobolev(inputs.delta));
  if (instance.source) {
    double g_h_sup = 0.0;
    for (double t : truth.time_grid) {
      const SpectralField g = instance.source(t);
      g_h_sup = std::max(g_h_sup, norm(g, NormSpec::sobolev(inputs.delta)));
      out.g_vtilde_sup = std::max(out.g_vtilde_sup, safe_norm(g, vtilde));
    }
    out.D_bar = factor * g_h_sup;
  }

  const double K = inputs.K_effective;
  const double n_d = static_cast<double>(params.n);
  const double level1 = (M + 1.0) * std::exp(2.0 * T * rate) / n_d;
  out.Phi = (kPi * kPi * inputs.V_max * inputs.V_max + out.C_bar * out.C_bar +
             kPi * kPi * T * T * T * inputs.vartheta * inputs.vartheta +
             T * out.D_bar * out.D_bar) *
                level1 +
            inputs.eps * inputs.eps * std::exp(2.0 * T * rate) * T * T *
                out.u_h2beta_sup * out.u_h2beta_sup +
            (out.u_T_vtilde * out.u_T_vtilde +
             T * out.g_vtilde_sup * out.g_vtilde_sup +
             T * params.a0 * params.a0 * out.u_vtilde_sup * out.u_vtilde_sup);

  const double Mb = std::pow(M, beta);
  const double l2_front = std::exp((2.0 * K + 4.0) * T);
  out.l2_values.resize(truth.time_grid.size());
  for (std::size_t j = 0; j < truth.time_grid.size(); ++j) {
    out.l2_values[j] =
        l2_front * std::exp(-2.0 * truth.time_grid[j] * Mb) * out.Phi;
  }

  out.hbeta_applicable = params.b0 > 0.0;
  out.hbeta_values.assign(truth.time_grid.size(),
                          std::numeric_limits<double>::infinity());
  if (out.hbeta_applicable) {
    const double b0 = params.b0;
    const double level2 =
        (std::pow(M, 2.0 * beta + 1.0) + std::pow(M, 2.0 * beta)) *
        std::exp(2.0 * T * rate) / n_d;
    out.Pi =
        (kPi * kPi * inputs.V_max * inputs.V_max + out.C_bar * out.C_bar +
         (8.0 / b0) * kPi * kPi * T * T * T * inputs.vartheta *
             inputs.vartheta +
         (8.0 / b0) * T * out.D_bar * out.D_bar) *
            level2 +
        (4.0 * std::exp(2.0 * T * rate) * inputs.eps * inputs.eps * T * T /
         b0) *
            out.u_h2beta_sup * out.u_h2beta_sup +
        out.u_T_vtilde * out.u_T_vtilde +
        (8.0 * T / b0) * out.g_vtilde_sup * out.g_vtilde_sup +
        (8.0 * T * params.a0 * params.a0 / b0) * out.u_vtilde_sup *
            out.u_vtilde_sup;
    for (std::size_t j = 0; j < truth.time_grid.size(); ++j) {
      const double t = truth.time_grid[j];
      out.hbeta_values[j] = std::exp(-2.0 * rate * t) *
                            std::exp((8.0 / b0) * K * K * (T - t)) * out.Pi;
    }
  }
  return out;
}

double lemma_final_bound(const QRParams& params, double beta, double T,
                         double V_max, double C_bar, double u_T_vtilde) {
  if (params.n == 0) {
    throw validation_error("sample count n must be positive");
  }
  const double M = static_cast<double>(params.M_n);
  return (kPi * kPi * V_max * V_max + C_bar * C_bar) * (M + 1.0) /
             static_cast<double>(params.n) +
         std::exp(-2.0 * T * mode_rate(params.M_n, beta)) * u_T_vtilde *
             u_T_vtilde;
}

double lemma_source_bound(const QRParams& params, double beta, double T,
                          double vartheta, double D_bar, double g_vtilde_sup) {
  if (params.n == 0) {
    throw validation_error("sample count n must be positive");
  }
  const double M = static_cast<double>(params.M_n);
  return (kPi * kPi * T * vartheta * vartheta + D_bar * D_bar) * (M + 1.0) /
             static_cast<double>(params.n) +
         std::exp(-2.0 * T * mode_rate(params.M_n, beta)) * g_vtilde_sup *
             g_vtilde_sup;
}

double qr_error_at_zero(const QRSolution& solution, const SpectralField& u0) {
  if (!solution.t_n) {
    throw validation_error(
        "solution carries no initial evaluation time t_n");
  }
  const auto& grid = solution.time_grid;
  if (grid.size() < 2 || solution.states.size() != grid.size()) {
    throw validation_error("solution must pair each time with a state");
  }
  const double t = *solution.t_n;
  const double tol = 1e-12 * std::max(1.0, std::abs(grid.back()));
  if (t < grid.front() - tol || t > grid.back() + tol) {
    throw validation_error("t_n lies outside the solution grid");
  }
  std::size_t j = 0;
  while (j + 2 < grid.size() && grid[j + 1] < t) {
    ++j;
  }
  const double w =
      std::clamp((t - grid[j]) / (grid[j + 1] - grid[j]), 0.0, 1.0);
  const std::size_t cap =
      std::max(solution.states[j].cap(), solution.states[j + 1].cap());
  SpectralField interp(cap);
  for (std::size_t p = 0; p <= cap; ++p) {
    interp.coeffs[p] = (1.0 - w) * solution.states[j].at(p) +
                       w * solution.states[j + 1].at(p);
  }
  return l2_distance(interp, u0);
}

double qr_initial_time_rhs(double Phi, double K_effective, std::size_t M_n,
                           double beta, double T, double du_dt_sup) {
  if (M_n < 1) {
    throw validation_error("cutoff M_n must be positive");
  }
  const double Mb = std::pow(static_cast<double>(M_n), beta);
  return 2.0 * Phi * std::exp((2.0 * K_effective + 4.0) * T) / Mb +
         2.0 / Mb * du_dt_sup * du_dt_sup;
}

double time_derivative_sup(const Trajectory& truth,
                           const ProblemInstance& instance) {
  if (truth.states.empty() || truth.states.size() != truth.time_grid.size()) {
    throw validation_error("trajectory must pair each time with a state");
  }
  double sup = 0.0;
  for (std::size_t j = 0; j < truth.states.size(); ++j) {
    const SpectralField& u = truth.states[j];
    const double t = truth.time_grid[j];
    SpectralField du = apply_pointwise(instance.nonlinearity, u, u.cap());
    du = add_scaled(du, frac_laplacian_apply(u, instance.beta),
                    -instance.coefficient(t));
    if (instance.source) {
      du = add_scaled(du, instance.source(t), 1.0);
    }
    sup = std::max(sup, norm(du, NormSpec::l2()));
  }
  return sup;
}

}  // namespace fracback
