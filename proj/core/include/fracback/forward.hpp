#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fracback/problem.hpp"

namespace fracback {

/// Apply a pointwise nonlinearity pseudospectrally: sample the field at
/// 2*cap+2 midpoint nodes, apply f pointwise, project back onto modes 0..cap.
[[nodiscard]] SpectralField apply_pointwise(const Nonlinearity& F,
                                            const SpectralField& field,
                                            std::size_t cap);

/// Solve the forward problem u_t + a(t) (-Lap)^beta u = F(u) + g on the given
/// time grid with modes 0..cap. The linear part uses exact per-mode
/// exponential integrating factors (per-step Simpson quadrature of a); the
/// nonlinearity uses a predictor-corrector exponential-trapezoid step
/// (second order).
///
/// If refine_tol is set, the solve is repeated on a once-halved grid and a
/// numerical_error is thrown when the L2 change in u(., T) exceeds the
/// tolerance; the coarse-grid trajectory is returned.
[[nodiscard]] Trajectory forward_solve(
    const ProblemInstance& instance, const std::vector<double>& grid,
    std::size_t cap, std::optional<double> refine_tol = std::nullopt);

/// Maximum over grid times of the L2 distance between the trajectory state
/// and the constant-coefficient mild representation
///   u_p(t) = e^{(T-t) p^{2 beta}} u_{T,p}
///            - int_t^T e^{(s-t) p^{2 beta}} (g_p(s) + F_p(u)(s)) ds,
/// evaluated with trapezoid quadrature on the trajectory grid. Mode/time
/// pairs whose amplification exponent (T-t) p^{2 beta} exceeds 700 are
/// excluded from the distance; their count is written to excluded_pairs when
/// provided. Requires a(t) = 1 on the grid (validation_error otherwise).
[[nodiscard]] double mild_residual(const Trajectory& traj,
                                   const ProblemInstance& instance,
                                   std::size_t* excluded_pairs = nullptr);

/// Export a trajectory as CSV with columns (t, p, coefficient).
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace fracback
