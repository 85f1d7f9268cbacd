#include "fracback/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracback/errors.hpp"
#include "fracback/forward.hpp"

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

void require_unit_coefficient(const ProblemInstance& instance,
                              const std::vector<double>& grid) {
  for (double t : grid) {
    if (std::abs(instance.coefficient(t) - 1.0) > 1e-12) {
      throw validation_error(
          "spectral-cutoff regularizers require a(t) = 1 on the grid");
    }
  }
}

void check_params(const TruncationParams& params, double T, double beta) {
  if (params.M_n < 1 || params.M_n >= params.n) {
    throw validation_error("cutoff must satisfy 0 < M_n < n");
  }
  if (!(params.picard_tol > 0.0)) {
    throw validation_error("picard_tol must be positive");
  }
  if (params.picard_max_iters < 1) {
    throw validation_error("picard_max_iters must be at least 1");
  }
  const double exponent =
      2.0 * T * mode_rate(params.M_n, beta);
  if (exponent > 2.0 * kExpGuard) {
    throw validation_error(
        "amplification exponent 2 T M_n^{2 beta} = " + std::to_string(exponent) +
        " exceeds the floating guard; shrink M_n or T");
  }
}

/// Index of the grid node matching t, or a validation_error.
std::size_t node_index(const std::vector<double>& grid, double t) {
  const double tol = 1e-12 * std::max(1.0, std::abs(grid.back()));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (std::abs(grid[j] - t) <= tol) {
      return j;
    }
  }
  throw validation_error("evaluation time t = " + std::to_string(t) +
                         " does not coincide with a grid node");
}

/// Discrete source coefficients d_p(t_j) for p = 0..M_n over the whole grid;
/// row 0 holds the raw mean channel.
std::vector<std::vector<double>> source_coefficient_paths(
    const std::vector<std::vector<double>>& source_paths, std::size_t M_n,
    std::size_t grid_size) {
  const std::size_t n = source_paths.size();
  if (n < 2 || M_n >= n) {
    throw validation_error("source paths must cover n > M_n nodes");
  }
  for (const auto& series : source_paths) {
    if (series.size() != grid_size) {
      throw validation_error("every source series must match the time grid");
    }
  }
  std::vector<std::vector<double>> d(M_n + 1,
                                     std::vector<double>(grid_size, 0.0));
  GridSamples slice;
  slice.n = n;
  slice.values.resize(n);
  for (std::size_t j = 0; j < grid_size; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      slice.values[k] = source_paths[k][j];
    }
    for (std::size_t p = 0; p <= M_n; ++p) {
      d[p][j] = discrete_coefficient(slice, p);
    }
  }
  return d;
}

/// Backward suffix integrals S_j = int_{t_j}^T e^{(s - t_j) kappa} y(s) ds by
/// trapezoid on the grid, for one mode, filled for every j.
std::vector<double> suffix_integrals(const std::vector<double>& grid,
                                     const std::vector<double>& y,
                                     double kappa) {
  const std::size_t m = grid.size() - 1;
  std::vector<double> S(m + 1, 0.0);
  for (std::size_t back = 1; back <= m; ++back) {
    const std::size_t j = m - back;
    const double h = grid[j + 1] - grid[j];
    const double grow = std::exp(h * kappa);
    S[j] = grow * S[j + 1] + 0.5 * h * (y[j] + grow * y[j + 1]);
  }
  return S;
}

/// Forward prefix integrals I_j = int_0^{t_j} e^{(s - t_j) kappa} y(s) ds
/// (stable kernel <= 1), for one mode, filled for every j.
std::vector<double> prefix_integrals(const std::vector<double>& grid,
                                     const std::vector<double>& y,
                                     double kappa) {
  const std::size_t m = grid.size() - 1;
  std::vector<double> I(m + 1, 0.0);
  for (std::size_t j = 1; j <= m; ++j) {
    const double h = grid[j] - grid[j - 1];
    const double decay = std::exp(-h * kappa);
    I[j] = decay * I[j - 1] + 0.5 * h * (decay * y[j - 1] + y[j]);
  }
  return I;
}

double sup_l2_increment(const std::vector<SpectralField>& a,
                        const std::vector<SpectralField>& b,
                        const std::vector<double>& weights) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    worst = std::max(worst, weights[j] * l2_distance(a[j], b[j]));
  }
  return worst;
}

struct PicardOutcome {
  std::vector<SpectralField> states;
  std::size_t iterations = 0;
  double final_increment = 0.0;
  double final_ratio = 0.0;
};

template <typename Map>
PicardOutcome picard_iterate(const std::vector<SpectralField>& start,
                             Map&& map, const std::vector<double>& weights,
                             double tol, std::size_t max_iters) {
  PicardOutcome out;
  out.states = start;
  double prev_inc = -1.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    std::vector<SpectralField> next = map(out.states);
    const double inc = sup_l2_increment(next, out.states, weights);
    out.states = std::move(next);
    out.iterations = it;
    out.final_increment = inc;
    out.final_ratio = prev_inc > 0.0 ? inc / prev_inc : 0.0;
    if (inc <= tol) {
      return out;
    }
    prev_inc = inc;
  }
  throw numerical_error(
      "fixed-point iteration cap " + std::to_string(max_iters) +
      " exceeded; last increment " + std::to_string(out.final_increment) +
      ", contraction ratio " + std::to_string(out.final_ratio));
}

}  // namespace

std::size_t choose_M_n(std::size_t n, double sigma_rate, double T,
                       double beta) {
  if (n < 3) {
    throw validation_error("cutoff selection requires n >= 3");
  }
  if (!(sigma_rate > 0.0) || !(sigma_rate < 1.0)) {
    throw validation_error("rate exponent sigma must lie in (0, 1)");
  }
  if (!(T > 0.0)) {
    throw validation_error("T must be positive");
  }
  if (!(beta > 0.0)) {
    throw validation_error("fractional order beta must be positive");
  }
  const double raw = std::pow(
      sigma_rate / (2.0 * T) * std::log(static_cast<double>(n)),
      1.0 / (2.0 * beta));
  const double floored = std::floor(raw);
  return floored < 1.0 ? 1 : static_cast<std::size_t>(floored);
}

double truncation_level(const TruncationParams& params, double T,
                        double beta) {
  if (params.n == 0) {
    throw validation_error("sample count n must be positive");
  }
  const double exponent = 2.0 * T * mode_rate(params.M_n, beta);
  if (exponent > kExpGuard) {
    throw validation_error(
        "regularization level overflows: 2 T M_n^{2 beta} = " +
        std::to_string(exponent));
  }
  return (static_cast<double>(params.M_n) + 1.0) * std::exp(exponent) /
         static_cast<double>(params.n);
}

SpectralField phi_data(const GridSamples& noisy_final, std::size_t M_n,
                       double t, double beta, double T) {
  if (!(t >= -1e-12) || !(t <= T + 1e-12)) {
    throw validation_error("evaluation time must lie in [0, T]");
  }
  if (M_n < 1 || M_n >= noisy_final.n) {
    throw validation_error("cutoff must satisfy 0 < M_n < n");
  }
  const double guard = (T - t) * mode_rate(M_n, beta);
  if (guard > kExpGuard) {
    throw validation_error(
        "amplification exponent (T-t) M_n^{2 beta} = " + std::to_string(guard) +
        " exceeds the floating guard");
  }
  SpectralField out = project(noisy_final, M_n);
  for (std::size_t p = 1; p <= M_n; ++p) {
    out.coeffs[p] *= std::exp((T - t) * mode_rate(p, beta));
  }
  return out;
}

SpectralField phi_source(const std::vector<std::vector<double>>& source_paths,
                         std::size_t M_n, const std::vector<double>& grid,
                         double t, double beta) {
  if (grid.size() < 2) {
    throw validation_error("time grid needs at least two nodes");
  }
  const double T = grid.back();
  const std::size_t j0 = node_index(grid, t);
  const double guard = (T - t) * mode_rate(M_n, beta);
  if (guard > kExpGuard) {
    throw validation_error(
        "amplification exponent (T-t) M_n^{2 beta} = " + std::to_string(guard) +
        " exceeds the floating guard");
  }

  const auto d = source_coefficient_paths(source_paths, M_n, grid.size());

  SpectralField out(M_n);
  out.coeffs[0] = std::sqrt(kPi) * d[0][j0];  // raw mean at time t, no integral
  for (std::size_t p = 1; p <= M_n; ++p) {
    const double kappa = mode_rate(p, beta);
    double integral = 0.0;
    for (std::size_t j = j0; j + 1 < grid.size(); ++j) {
      const double h = grid[j + 1] - grid[j];
      integral += 0.5 * h *
                  (std::exp((grid[j] - t) * kappa) * d[p][j] +
                   std::exp((grid[j + 1] - t) * kappa) * d[p][j + 1]);
    }
    out.coeffs[p] = integral;
  }
  return out;
}

Nonlinearity clamp_nonlinearity(const Nonlinearity& F, double Q) {
  if (std::isinf(Q) && Q > 0.0) {
    return F;  // sentinel: no clamping needed
  }
  if (!(Q > 0.0)) {
    throw validation_error("clamp level Q must be positive");
  }
  if (!F.f) {
    throw validation_error("nonlinearity '" + F.name + "' has no function");
  }
  Nonlinearity out = F;
  out.name = F.name + "_clamped";
  out.f = [base = F.f, Q](double u) { return base(std::clamp(u, -Q, Q)); };
  out.globally_lipschitz = true;
  if (F.globally_lipschitz) {
    out.lipschitz_K = F.lipschitz_K;
  } else if (F.local_K) {
    out.lipschitz_K = 2.0 * F.local_K(Q);
  } else {
    throw validation_error("nonlinearity '" + F.name +
                           "' declares no Lipschitz profile to clamp");
  }
  out.local_K = [K = out.lipschitz_K](double) { return K; };
  return out;
}

std::vector<SpectralField> first_data_term(const ObservedData& observed,
                                           const TruncationParams& params,
                                           const std::vector<double>& grid,
                                           double beta) {
  const std::size_t m = grid.size() - 1;
  const double T = grid.back();
  if (observed.final_samples.n != params.n) {
    throw validation_error("observed sample count does not match params.n");
  }
  check_params(params, T, beta);

  const SpectralField projected = project(observed.final_samples, params.M_n);
  std::vector<SpectralField> data(m + 1, SpectralField(params.M_n));
  for (std::size_t j = 0; j <= m; ++j) {
    data[j].coeffs[0] = projected.coeffs[0];
    for (std::size_t p = 1; p <= params.M_n; ++p) {
      data[j].coeffs[p] =
          std::exp((T - grid[j]) * mode_rate(p, beta)) * projected.coeffs[p];
    }
  }

  if (!observed.source_paths.empty()) {
    const auto d =
        source_coefficient_paths(observed.source_paths, params.M_n, m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
      data[j].coeffs[0] -= std::sqrt(kPi) * d[0][j];
    }
    for (std::size_t p = 1; p <= params.M_n; ++p) {
      const auto S = suffix_integrals(grid, d[p], mode_rate(p, beta));
      for (std::size_t j = 0; j <= m; ++j) {
        data[j].coeffs[p] -= S[j];
      }
    }
  }
  return data;
}

std::vector<SpectralField> apply_first_regularizer_map(
    const std::vector<SpectralField>& data_term,
    const std::vector<SpectralField>& iterate, const Nonlinearity& F,
    double beta, const std::vector<double>& grid, std::size_t M_n) {
  if (data_term.size() != grid.size() || iterate.size() != grid.size()) {
    throw validation_error("states must pair one field with each grid node");
  }
  const std::size_t m = grid.size() - 1;
  if ((grid.back() - grid.front()) * mode_rate(M_n, beta) > kExpGuard) {
    throw validation_error("amplification exponent exceeds the floating guard");
  }

  std::vector<std::vector<double>> rhs(M_n + 1, std::vector<double>(m + 1));
  for (std::size_t j = 0; j <= m; ++j) {
    const SpectralField f = apply_pointwise(F, iterate[j], M_n);
    for (std::size_t p = 0; p <= M_n; ++p) {
      rhs[p][j] = f.coeffs[p];
    }
  }

  std::vector<SpectralField> out(m + 1, SpectralField(M_n));
  for (std::size_t p = 0; p <= M_n; ++p) {
    const auto S = suffix_integrals(grid, rhs[p], mode_rate(p, beta));
    for (std::size_t j = 0; j <= m; ++j) {
      out[j].coeffs[p] = data_term[j].at(p) - S[j];
    }
  }
  return out;
}

std::vector<SpectralField> second_data_term(const GridSamples& noisy_final,
                                            const TruncationParams& params,
                                            const std::vector<double>& grid,
                                            double beta, std::size_t cap) {
  const double T = grid.back();
  if (noisy_final.n != params.n) {
    throw validation_error("observed sample count does not match params.n");
  }
  if (cap < params.M_n) {
    throw validation_error("cap must be at least M_n");
  }
  check_params(params, T, beta);

  const SpectralField projected = project(noisy_final, params.M_n);
  std::vector<SpectralField> data(grid.size(), SpectralField(cap));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    data[j].coeffs[0] = projected.coeffs[0];
    for (std::size_t p = 1; p <= params.M_n; ++p) {
      data[j].coeffs[p] =
          std::exp((T - grid[j]) * mode_rate(p, beta)) * projected.coeffs[p];
    }
  }
  return data;
}

std::vector<SpectralField> apply_second_regularizer_map(
    const std::vector<SpectralField>& data_term,
    const std::vector<SpectralField>& iterate, const Nonlinearity& F,
    double beta, const std::vector<double>& grid, std::size_t M_n,
    std::size_t cap) {
  if (data_term.size() != grid.size() || iterate.size() != grid.size()) {
    throw validation_error("states must pair one field with each grid node");
  }
  if (cap < M_n) {
    throw validation_error("cap must be at least M_n");
  }
  const std::size_t m = grid.size() - 1;
  if ((grid.back() - grid.front()) * mode_rate(M_n, beta) > kExpGuard) {
    throw validation_error("amplification exponent exceeds the floating guard");
  }

  std::vector<std::vector<double>> rhs(cap + 1, std::vector<double>(m + 1));
  for (std::size_t j = 0; j <= m; ++j) {
    const SpectralField f = apply_pointwise(F, iterate[j], cap);
    for (std::size_t p = 0; p <= cap; ++p) {
      rhs[p][j] = f.coeffs[p];
    }
  }

  std::vector<SpectralField> out(m + 1, SpectralField(cap));
  for (std::size_t p = 0; p <= M_n; ++p) {
    const auto S = suffix_integrals(grid, rhs[p], mode_rate(p, beta));
    for (std::size_t j = 0; j <= m; ++j) {
      out[j].coeffs[p] = data_term[j].at(p) - S[j];
    }
  }
  for (std::size_t p = M_n + 1; p <= cap; ++p) {
    const auto I = prefix_integrals(grid, rhs[p], mode_rate(p, beta));
    for (std::size_t j = 0; j <= m; ++j) {
      out[j].coeffs[p] = data_term[j].at(p) + I[j];
    }
  }
  return out;
}

RegularizedSolution solve_first_regularizer(const ObservedData& observed,
                                            const ProblemInstance& instance,
                                            const TruncationParams& params,
                                            const std::vector<double>& grid) {
  check_solver_grid(grid, instance.T);
  require_unit_coefficient(instance, grid);
  if (!observed.source_paths.empty() &&
      observed.source_paths.front().size() != grid.size()) {
    throw validation_error("observed source paths must live on the solve grid");
  }

  const auto data = first_data_term(observed, params, grid, instance.beta);
  const std::vector<double> weights(grid.size(), 1.0);
  PicardOutcome picard = picard_iterate(
      data,
      [&](const std::vector<SpectralField>& u) {
        return apply_first_regularizer_map(data, u, instance.nonlinearity,
                                           instance.beta, grid, params.M_n);
      },
      weights, params.picard_tol, params.picard_max_iters);

  RegularizedSolution sol;
  sol.method = RegularizerMethod::first;
  sol.time_grid = grid;
  sol.states = std::move(picard.states);
  sol.picard_iterations = picard.iterations;
  sol.final_increment = picard.final_increment;
  sol.final_contraction_ratio = picard.final_ratio;
  return sol;
}

RegularizedSolution solve_second_regularizer(const GridSamples& noisy_final,
                                             const ProblemInstance& instance,
                                             const TruncationParams& params,
                                             const std::vector<double>& grid,
                                             std::size_t cap) {
  check_solver_grid(grid, instance.T);
  require_unit_coefficient(instance, grid);
  if (instance.source) {
    throw validation_error("the second regularizer requires a zero source");
  }
  if (!instance.nonlinearity.globally_lipschitz) {
    throw validation_error(
        "the second regularizer requires a globally Lipschitz nonlinearity");
  }
  const double KT5 = 5.0 * instance.nonlinearity.lipschitz_K * instance.T;
  if (!(KT5 < 1.0)) {
    throw validation_error("the second regularizer requires 5 K T < 1; got " +
                           std::to_string(KT5));
  }

  const auto data =
      second_data_term(noisy_final, params, grid, instance.beta, cap);
  // Weighted sup norm sup_j e^{t_j M^{2 beta}} ||.|| under which the map
  // contracts; the weight is finite because T M^{2 beta} is guarded.
  std::vector<double> weights(grid.size());
  const double rate = mode_rate(params.M_n, instance.beta);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    weights[j] = std::exp(grid[j] * rate);
  }
  PicardOutcome picard = picard_iterate(
      data,
      [&](const std::vector<SpectralField>& u) {
        return apply_second_regularizer_map(data, u, instance.nonlinearity,
                                            instance.beta, grid, params.M_n,
                                            cap);
      },
      weights, params.picard_tol, params.picard_max_iters);

  RegularizedSolution sol;
  sol.method = RegularizerMethod::second;
  sol.time_grid = grid;
  sol.states = std::move(picard.states);
  sol.picard_iterations = picard.iterations;
  sol.final_increment = picard.final_increment;
  sol.final_contraction_ratio = picard.final_ratio;
  return sol;
}

TruncationBound evaluate_truncation_bound(TruncationBoundKind kind,
                                          const Trajectory& truth,
                                          const ProblemInstance& instance,
                                          const TruncationParams& params,
                                          const TruncationBoundInputs& inputs) {
  if (truth.states.empty() || truth.states.size() != truth.time_grid.size()) {
    throw validation_error("trajectory must pair each time with a state");
  }
  if (!instance.nonlinearity.globally_lipschitz) {
    throw validation_error(
        "bound evaluation requires a globally Lipschitz nonlinearity");
  }
  const double T = instance.T;
  const double beta = instance.beta;
  const double K = instance.nonlinearity.lipschitz_K;
  const std::size_t M = params.M_n;
  const double level = truncation_level(params, T, beta);
  const std::size_t cap = truth.states.front().cap();

  TruncationBound bound;
  bound.kind = kind;
  bound.time_grid = truth.time_grid;

  // Composite constants from the defining formulas.
  double sup_l2 = 0.0;
  for (const SpectralField& s : truth.states) {
    sup_l2 = std::max(sup_l2, norm(s, NormSpec::l2()));
  }
  TruncationConstants& c = bound.constants;
  c.E = std::abs(instance.nonlinearity.f(0.0)) * std::sqrt(kPi) +
        std::max(K, 1.0) * sup_l2;
  c.E1_tilde = c.E / T + c.E;
  c.C1 = 2.0 * std::sqrt(2.0 / kPi) * c.E1_tilde / std::pow(4.0, beta) *
         std::riemann_zeta(2.0 * beta);
  c.E2 = inputs.E2_source;
  if (c.E2 > 0.0) {
    if (!(inputs.gamma_source > 1.0)) {
      throw validation_error("source-smoothness exponent gamma must exceed 1");
    }
    c.C2 = 2.0 * std::sqrt(2.0 / kPi) * c.E2 /
           std::pow(2.0, inputs.gamma_source) *
           std::riemann_zeta(inputs.gamma_source);
  }
  c.C3 = kPi * kPi * inputs.V_max * inputs.V_max +
         inputs.vartheta * inputs.vartheta * (T + T * T * T) + c.C1 * c.C1 +
         T * T * c.C2 * c.C2;

  // Direct-summation audit of the claimed budget up to the trajectory cap.
  const auto weighted_sup = [&](double mode_power) {
    double sup = 0.0;
    for (std::size_t j = 0; j < truth.states.size(); ++j) {
      double sum = 0.0;
      for (std::size_t p = 1; p <= cap; ++p) {
        const double cp = truth.states[j].at(p);
        if (cp == 0.0) {
          continue;
        }
        const double expo = 2.0 * mode_rate(p, beta) * truth.time_grid[j];
        if (expo > kExpGuard) {
          return std::numeric_limits<double>::infinity();
        }
        sum += std::pow(static_cast<double>(p), mode_power) * std::exp(expo) *
               cp * cp;
      }
      sup = std::max(sup, sum);
    }
    return sup;
  };

  const std::size_t count = truth.time_grid.size();
  bound.values.resize(count);
  switch (kind) {
    case TruncationBoundKind::first_estimate1: {
      bound.budget = inputs.P1;
      bound.assumption_value = weighted_sup(0.0);
      bound.assumption_ok =
          bound.assumption_value <= inputs.P1 * (1.0 + 1e-9) + 1e-12;
      for (std::size_t j = 0; j < count; ++j) {
        const double t = truth.time_grid[j];
        bound.values[j] = 6.0 * std::exp(-2.0 * mode_rate(M, beta) * t) *
                          (c.C3 * level + inputs.P1) *
                          std::exp(6.0 * K * (T - t));
      }
      break;
    }
    case TruncationBoundKind::first_estimate2: {
      if (!(inputs.alpha > 0.0)) {
        throw validation_error("exponent alpha must be positive");
      }
      bound.budget = inputs.P2;
      bound.assumption_value = weighted_sup(2.0 * beta * inputs.alpha);
      bound.assumption_ok =
          bound.assumption_value <= inputs.P2 * (1.0 + 1e-9) + 1e-12;
      const double tail =
          std::pow(static_cast<double>(M), -2.0 * beta * inputs.alpha) *
          inputs.P2;
      for (std::size_t j = 0; j < count; ++j) {
        const double t = truth.time_grid[j];
        bound.values[j] = 6.0 * std::exp(-2.0 * mode_rate(M, beta) * t) *
                          (c.C3 * level + tail) * std::exp(6.0 * K * (T - t));
      }
      break;
    }
    case TruncationBoundKind::second: {
      if (instance.source) {
        throw validation_error("the second-method bound requires a zero source");
      }
      const double KT5 = 5.0 * K * T;
      if (!(KT5 < 1.0)) {
        throw validation_error("the second-method bound requires 5 K T < 1");
      }
      if (!(inputs.gamma_u > 0.0)) {
        throw validation_error("Sobolev order gamma_u must be positive");
      }
      const double h_norm =
          norm(truth.states.front(), NormSpec::sobolev(inputs.gamma_u));
      bound.budget = h_norm * h_norm;
      double sup_h = 0.0;
      for (const SpectralField& s : truth.states) {
        const double v = norm(s, NormSpec::sobolev(inputs.gamma_u));
        sup_h = std::max(sup_h, v * v);
      }
      bound.assumption_value = sup_h;
      bound.assumption_ok = std::isfinite(sup_h);
      const double front = (5.0 * kPi * kPi * inputs.V_max * inputs.V_max +
                            c.C1 * c.C1) *
                           level;
      const double tail =
          5.0 * std::pow(static_cast<double>(M), -2.0 * beta * inputs.gamma_u) *
          bound.budget;
      for (std::size_t j = 0; j < count; ++j) {
        const double t = truth.time_grid[j];
        bound.values[j] = std::exp(-2.0 * mode_rate(M, beta) * t) *
                          (front + tail) / (1.0 - KT5);
      }
      break;
    }
  }
  return bound;
}

}  // namespace fracback
