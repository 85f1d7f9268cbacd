#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "fracback/noise.hpp"
#include "fracback/problem.hpp"
#include "fracback/spectral.hpp"

namespace fracback {

/// Controls for the quasi-reversibility regularizer with a randomly
/// perturbed time-dependent coefficient. p_star = M_n a0^{-1/(2 beta)} is the
/// head/tail threshold, computed once by make_qr_params; b0 is the realized
/// lower bound of a0 - observed coefficient (set per trial; the higher-order
/// bound needs b0 > 0).
struct QRParams {
  std::size_t M_n = 1;
  std::size_t n = 0;
  double Q_n = std::numeric_limits<double>::infinity();  // clamp level
  double a0 = 1.0;
  double b0 = 0.0;
  double p_star = 0.0;
  double picard_tol = 1e-10;
  std::size_t picard_max_iters = 200;
};

/// Builds params with the stored tail threshold p_star = M_n a0^{-1/(2 beta)}.
[[nodiscard]] QRParams make_qr_params(
    std::size_t M_n, std::size_t n, double a0, double beta,
    double Q_n = std::numeric_limits<double>::infinity());

/// Regularized backward solution with diagnostics. t_n is the initial-time
/// evaluation point (unset when its existence precondition fails).
struct QRSolution {
  std::vector<double> time_grid;
  std::vector<SpectralField> states;  // W(., t_j), modes 0..cap
  std::optional<double> t_n;
  std::size_t picard_iterations = 0;
  double final_increment = 0.0;
  double final_contraction_ratio = 0.0;
};

/// Discrete projection of noisy final samples onto modes 0..M_n, with no
/// time amplification (mode 0 carries the plain mean as the constant term).
[[nodiscard]] SpectralField data_approx_final(const GridSamples& noisy_final,
                                              std::size_t M_n);

/// Per-time discrete projection of noisy source paths onto modes 0..M_n.
/// source_paths[k][j] pairs node k with time index j.
[[nodiscard]] std::vector<SpectralField> data_approx_source(
    const std::vector<std::vector<double>>& source_paths, std::size_t M_n);

enum class HeadTail { head, tail };

/// Spectral multipliers of the head/tail splitting at p_star:
/// tail: R(v)  =      sum_{p >= p_star} p^{2 beta} v_p phi_p,
/// head: P(v)  = a0 * sum_{p <  p_star} p^{2 beta} v_p phi_p.
/// The identity a0 * R(v) + P(v) = a0 * A^beta v holds for every field.
[[nodiscard]] SpectralField head_tail_apply(const SpectralField& field,
                                            HeadTail which,
                                            const QRParams& params,
                                            double beta);

/// Mild solve of the regularized backward problem
///   dW/dt + abar(t) A^beta W - a0 R(W) = F(W) + gbar,  W(., T) = w_bar
/// on the grid: in reversed time s = T - t each mode evolves with generator
/// kappa_p(t) = abar(t) p^{2 beta} on the head (p < p_star) and
/// (abar(t) - a0) p^{2 beta} on the tail, integrated with exact exponential
/// factors of the cumulative trapezoid of kappa and Picard iteration for the
/// nonlinearity (F is used as given; clamp beforehand if required).
/// g_bar_path may be empty (zero source); a_bar_path holds the observed
/// coefficient on the grid. Throws validation_error when T M_n^{2 beta}
/// exceeds the floating guard, numerical_error when a realized amplification
/// exponent exceeds it at runtime or the iteration cap is hit.
[[nodiscard]] QRSolution solve_qr_mild(
    const SpectralField& w_bar, const std::vector<SpectralField>& g_bar_path,
    const std::vector<double>& a_bar_path, const Nonlinearity& F, double beta,
    const QRParams& params, const std::vector<double>& grid, std::size_t cap);

/// Full pipeline from one trial's observations: projects the final samples
/// and source paths onto modes 0..M_n, clamps the nonlinearity at Q_n, and
/// runs solve_qr_mild with the observed coefficient path (falling back to
/// instance.coefficient sampled on the grid when the observation is empty).
[[nodiscard]] QRSolution solve_qr(const ObservedData& observed,
                                  const ProblemInstance& instance,
                                  const QRParams& params,
                                  const std::vector<double>& grid,
                                  std::size_t cap);

/// Unique root of e^{-t M_n^beta} = t in (0, T); requires
/// M_n^beta > (1/T) log(1/T). Bisection to residual <= 1e-12; the result
/// satisfies t_n <= M_n^{-beta/2}.
[[nodiscard]] double solve_t_n(std::size_t M_n, double beta, double T);

/// Clamp-level selection under the Lipschitz budget (1/(2T)) log(log n).
struct QnChoice {
  double Q_n = std::numeric_limits<double>::infinity();
  bool budget_met = true;
  double budget = 0.0;
};

/// Largest Q with K(Q) <= (1/(2T)) log(log n), by monotone bisection on the
/// declared Lipschitz profile. Globally Lipschitz nonlinearities need no
/// clamping: Q_n is the +infinity sentinel (budget_met records whether the
/// constant fits the budget). When even the profile's minimum exceeds the
/// budget, budget_met = false and Q_n is the largest Q attaining that
/// minimum. Requires n >= 3.
[[nodiscard]] QnChoice choose_Q_n(std::size_t n, double T,
                                  const Nonlinearity& F);

/// Caller-supplied inputs for the error-bound evaluation.
struct QRBoundInputs {
  double V_max = 0.0;
  double vartheta = 0.0;
  double eps = 0.0;
  double delta = 2.0;        // smoothness order for C_bar/D_bar, > 1
  double K_effective = 0.0;  // Lipschitz constant of the (clamped) F
};

/// Error-bound functionals and their ingredient norms. When a Gevrey-class
/// norm overflows (divergence up to cap), norms_finite is false and the
/// affected values are +infinity. hbeta_applicable is false when b0 <= 0.
struct QRBounds {
  std::vector<double> time_grid;
  std::vector<double> l2_values;     // per-t right side of the L2 bound
  std::vector<double> hbeta_values;  // per-t right side of the H^beta bound
  bool hbeta_applicable = true;
  bool norms_finite = true;
  double Phi = 0.0;  // L2-bound functional
  double Pi = 0.0;   // H^beta-bound functional
  double C_bar = 0.0;
  double D_bar = 0.0;
  double u_T_vtilde = 0.0;    // ||u(., T)|| in the Gevrey class
  double g_vtilde_sup = 0.0;  // sup_t of the source's Gevrey norm
  double u_vtilde_sup = 0.0;  // sup_t of the solution's Gevrey norm
  double u_h2beta_sup = 0.0;  // sup_t of the solution's order-2beta Sobolev norm
};

/// Evaluates the two a priori error bounds on the trajectory's grid:
/// L2:     e^{(2 K + 4) T} e^{-2 t M_n^beta} Phi,
/// H^beta: e^{-2 M_n^{2 beta} t} exp((8/b0) K^2 (T - t)) Pi,
/// with Phi and Pi assembled from the noise amplitudes, the aliasing
/// constants C_bar/D_bar at smoothness delta, and the solution/source norms
/// computed from the trajectory up to its cap.
[[nodiscard]] QRBounds evaluate_qr_bounds(const Trajectory& truth,
                                          const ProblemInstance& instance,
                                          const QRParams& params,
                                          const QRBoundInputs& inputs);

/// Mean-square data-approximation bound for the projected final samples:
/// (pi^2 Vmax^2 + C_bar^2)(M_n+1)/n + e^{-2 T M_n^{2 beta}} ||u_T||^2_Gevrey.
[[nodiscard]] double lemma_final_bound(const QRParams& params, double beta,
                                       double T, double V_max, double C_bar,
                                       double u_T_vtilde);

/// Mean-square data-approximation bound for the projected source paths:
/// (pi^2 T vartheta^2 + D_bar^2)(M_n+1)/n
///   + e^{-2 T M_n^{2 beta}} sup_t ||g(t)||^2_Gevrey.
[[nodiscard]] double lemma_source_bound(const QRParams& params, double beta,
                                        double T, double vartheta,
                                        double D_bar, double g_vtilde_sup);

/// L2 distance between the solution at t_n (linear interpolation between
/// grid states) and the supplied initial state.
[[nodiscard]] double qr_error_at_zero(const QRSolution& solution,
                                      const SpectralField& u0);

/// Right-hand side of the initial-time estimate:
/// 2 Phi e^{(2K+4)T} / M_n^beta + (2 / M_n^beta) du_dt_sup^2,
/// where du_dt_sup is the sup-in-time L2 norm of du/dt.
[[nodiscard]] double qr_initial_time_rhs(double Phi, double K_effective,
                                         std::size_t M_n, double beta,
                                         double T, double du_dt_sup);

/// sup over grid times of ||du/dt||_{L2} computed from the equation's right
/// side: du/dt = -a(t) A^beta u + F(u) + g(t).
[[nodiscard]] double time_derivative_sup(const Trajectory& truth,
                                         const ProblemInstance& instance);

}  // namespace fracback
