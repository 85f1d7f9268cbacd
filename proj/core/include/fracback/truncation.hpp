#pragma once

#include <cstddef>
#include <vector>

#include "fracback/noise.hpp"
#include "fracback/problem.hpp"
#include "fracback/spectral.hpp"

namespace fracback {

/// Controls for the spectral-cutoff regularizers (constant coefficient
/// a(t) = 1): mode cutoff M_n, backing sample count n, the rate exponent
/// sigma used to pick M_n, and Picard iteration controls.
struct TruncationParams {
  std::size_t M_n = 1;
  std::size_t n = 0;
  double sigma_rate = 0.5;  // in (0, 1)
  double picard_tol = 1e-10;
  std::size_t picard_max_iters = 200;
};

enum class RegularizerMethod { first, second };

/// A regularized backward solution on the experiment grid, plus fixed-point
/// iteration diagnostics. The first method stores modes 0..M_n only; the
/// second stores modes 0..cap, whose tail (p > M_n) carries the forward
/// integral term.
struct RegularizedSolution {
  RegularizerMethod method = RegularizerMethod::first;
  std::vector<double> time_grid;
  std::vector<SpectralField> states;
  std::size_t picard_iterations = 0;
  double final_increment = 0.0;
  double final_contraction_ratio = 0.0;  // last/previous increment; 0 if single sweep
};

/// Cutoff selection: max(1, floor((sigma/(2T) * log n)^{1/(2 beta)})), the
/// choice that makes e^{2 T M_n^{2 beta}} match n^sigma.
/// Requires n >= 3, sigma in (0,1), T > 0, beta > 0.
[[nodiscard]] std::size_t choose_M_n(std::size_t n, double sigma_rate, double T,
                                     double beta);

/// The reported regularization level (M_n + 1) e^{2 T M_n^{2 beta}} / n.
/// Throws validation_error when the exponent exceeds the floating guard.
[[nodiscard]] double truncation_level(const TruncationParams& params, double T,
                                      double beta);

/// Amplified spectral data operator applied to noisy final-value samples:
/// mode 0 carries the plain sample mean (as the constant term, never
/// amplified); mode 1 <= p <= M_n carries the discrete coefficient times
/// e^{(T-t) p^{2 beta}}; modes above M_n are zero.
/// Requires 0 <= t <= T, M_n < n; throws validation_error when the
/// amplification exponent (T-t) M_n^{2 beta} exceeds 700.
[[nodiscard]] SpectralField phi_data(const GridSamples& noisy_final,
                                     std::size_t M_n, double t, double beta,
                                     double T);

/// Source data operator: mode 0 carries the plain mean of the source samples
/// at time t itself (no time integral, by construction); mode 1 <= p <= M_n
/// carries the trapezoid quadrature of e^{(s-t) p^{2 beta}} times the
/// discrete source coefficient over grid nodes s in [t, T]. t must coincide
/// with a grid node. source_paths[k][j] pairs node k with grid[j].
[[nodiscard]] SpectralField phi_source(
    const std::vector<std::vector<double>>& source_paths, std::size_t M_n,
    const std::vector<double>& grid, double t, double beta);

/// Three-branch cutoff of a nonlinearity at level Q: F(Q) above Q, F(u) on
/// [-Q, Q], F(-Q) below -Q. The result is globally Lipschitz with constant
/// at most 2 K(Q). Q = +infinity returns F unchanged (no clamping needed).
[[nodiscard]] Nonlinearity clamp_nonlinearity(const Nonlinearity& F, double Q);

/// Data term of the first regularizer on the grid: phi_data minus phi_source
/// at every node (phi_source only when source paths are present).
[[nodiscard]] std::vector<SpectralField> first_data_term(
    const ObservedData& observed, const TruncationParams& params,
    const std::vector<double>& grid, double beta);

/// One application of the first regularizer's fixed-point map to an iterate:
/// data_term[j] minus the backward integrals of the nonlinearity,
///   out_p(t_j) = data_p(t_j) - int_{t_j}^T e^{(s-t_j) p^{2 beta}} F_p(U)(s) ds
/// for p = 0..M_n, with trapezoid quadrature on the grid.
[[nodiscard]] std::vector<SpectralField> apply_first_regularizer_map(
    const std::vector<SpectralField>& data_term,
    const std::vector<SpectralField>& iterate, const Nonlinearity& F,
    double beta, const std::vector<double>& grid, std::size_t M_n);

/// Data term of the second regularizer: phi_data at every node (tail zero).
[[nodiscard]] std::vector<SpectralField> second_data_term(
    const GridSamples& noisy_final, const TruncationParams& params,
    const std::vector<double>& grid, double beta, std::size_t cap);

/// One application of the second regularizer's fixed-point map: head modes
/// (p <= M_n) subtract the backward integral as in the first map; tail modes
/// (M_n < p <= cap) add the forward integral
///   int_0^{t_j} e^{(s-t_j) p^{2 beta}} F_p(U)(s) ds,
/// whose kernel never exceeds 1 (causal in t).
[[nodiscard]] std::vector<SpectralField> apply_second_regularizer_map(
    const std::vector<SpectralField>& data_term,
    const std::vector<SpectralField>& iterate, const Nonlinearity& F,
    double beta, const std::vector<double>& grid, std::size_t M_n,
    std::size_t cap);

/// Picard solve of the first regularized solution
///   U(t) = Phi(w)(t) - PhiSource(g)(t) - backward F-integrals on modes <= M_n
/// starting from the data term, stopping when the sup-over-grid L2 increment
/// falls below picard_tol. Requires a(t) = 1 on the grid.
/// Throws numerical_error when the iteration cap is exceeded (the message
/// reports the last contraction ratio).
[[nodiscard]] RegularizedSolution solve_first_regularizer(
    const ObservedData& observed, const ProblemInstance& instance,
    const TruncationParams& params, const std::vector<double>& grid);

/// Picard solve of the second regularized solution (zero source required):
/// head modes as in the first method, tail modes up to cap carrying the
/// stable forward integral. Requires a(t) = 1, g = 0, a globally Lipschitz
/// nonlinearity with 5 K T < 1, and cap >= M_n. The stopping increment is
/// measured in the weighted sup norm sup_j e^{t_j M_n^{2 beta}} ||.||_{L2}
/// under which the map is a strict contraction.
[[nodiscard]] RegularizedSolution solve_second_regularizer(
    const GridSamples& noisy_final, const ProblemInstance& instance,
    const TruncationParams& params, const std::vector<double>& grid,
    std::size_t cap);

enum class TruncationBoundKind { first_estimate1, first_estimate2, second };

/// Composite constants entering the error bounds, reported for inspection.
struct TruncationConstants {
  double E = 0.0;        // ||F(0)|| + max(K,1) sup_t ||u(t)||
  double E1_tilde = 0.0; // E/T + E
  double E2 = 0.0;       // declared source-smoothness budget
  double C1 = 0.0;       // 2 sqrt(2/pi) (E1_tilde / 4^beta) zeta(2 beta)
  double C2 = 0.0;       // 2 sqrt(2/pi) (E2 / 2^gamma) zeta(gamma)
  double C3 = 0.0;       // pi^2 Vmax^2 + vartheta^2 (T + T^3) + C1^2 + T^2 C2^2
};

/// Inputs the caller supplies to the bound evaluator: the noise amplitudes,
/// the smoothness exponents, and the claimed budgets.
struct TruncationBoundInputs {
  double V_max = 0.0;
  double vartheta = 0.0;
  double gamma_source = 2.0;  // source-smoothness exponent (> 1); with its
  double E2_source = 0.0;     // budget sup_t sum p^{2 gamma} g_p(t)^2
  double P1 = 0.0;            // first_estimate1 budget
  double alpha = 0.0;         // first_estimate2 exponent (> 0)
  double P2 = 0.0;            // first_estimate2 budget
  double gamma_u = 0.0;       // second: Sobolev order of u(., 0)
};

/// A priori error bound on the grid plus the assumption audit.
struct TruncationBound {
  TruncationBoundKind kind = TruncationBoundKind::first_estimate1;
  std::vector<double> time_grid;
  std::vector<double> values;
  TruncationConstants constants;
  double budget = 0.0;           // P1, P2, or ||u(., 0)||^2_{H^gamma} per kind
  bool assumption_ok = true;     // direct summation up to cap confirms the claim
  double assumption_value = 0.0; // the computed supremum (for reporting)
};

/// Evaluates the error bound of the selected kind on the trajectory's grid:
/// - first_estimate1: 6 e^{-2 M^{2b} t} [C3 (M+1) e^{2TM^{2b}} / n + P1] e^{6K(T-t)}
/// - first_estimate2: as above with M^{-2 b alpha} P2 in place of P1
/// - second: e^{-2 M^{2b} t} [(5 pi^2 Vmax^2 + C1^2)(M+1) e^{2TM^{2b}} / n
///           + 5 M^{-2 b gamma_u} ||u(., 0)||^2_{H^gamma_u}] / (1 - 5KT)
/// The claimed budget (P1/P2) is audited by direct summation over the
/// trajectory up to its cap; a violated claim sets assumption_ok = false.
/// Requires a globally Lipschitz nonlinearity (and 5KT < 1 for `second`).
[[nodiscard]] TruncationBound evaluate_truncation_bound(
    TruncationBoundKind kind, const Trajectory& truth,
    const ProblemInstance& instance, const TruncationParams& params,
    const TruncationBoundInputs& inputs);

}  // namespace fracback
