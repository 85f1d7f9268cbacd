#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fracback/spectral.hpp"

namespace fracback {

/// Random observation model: independent Gaussian errors on final-value
/// samples, independent Brownian paths added to per-node source samples, and
/// a single Brownian perturbation of the diffusion coefficient.
struct NoiseSpec {
  std::vector<double> sigma_k;  // per-node final-sample deviations
  double V_max = 1.0;           // strict upper bound for every sigma_k
  double vartheta = 0.0;        // source noise amplitude (>= 0)
  double eps = 0.0;             // coefficient noise amplitude (>= 0)
  std::uint64_t seed = 0;       // master seed for all noise streams
};

/// Convenience: n equal deviations.
[[nodiscard]] std::vector<double> constant_sigmas(std::size_t n, double value);

/// Coefficient path observation plus the assumption diagnostics the
/// higher-order error bound needs.
struct CoefficientObservation {
  std::vector<double> path;  // perturbed coefficient on the time grid
  bool within_bound = true;  // path stayed inside (0, a0] at every node
  double realized_b0 = 0.0;  // min over the grid of a0 - path
};

/// One trial's noisy data. source_paths[k][j] pairs node k (0-based) with
/// time_grid[j]; coefficient.path[j] lives on the same grid.
struct ObservedData {
  GridSamples final_samples;
  std::vector<std::vector<double>> source_paths;
  CoefficientObservation coefficient;
  std::vector<double> time_grid;
};

/// Noisy terminal values w(x_k) = u_T(x_k) + sigma_k eps_k with independent
/// standard normal eps_k drawn from the (seed, trial, node) substream.
/// Throws validation_error if sigma_k does not match the sample count or any
/// sigma_k lies outside [0, V_max).
[[nodiscard]] GridSamples observe_final(const GridSamples& true_samples,
                                        const NoiseSpec& spec,
                                        std::uint64_t trial);

/// Noisy source samples g(x_k, t_j) + vartheta xi_k(t_j), where the xi_k are
/// independent Brownian paths built from sqrt(dt) normal increments on the
/// grid (xi_k(0) = 0). Requires one time series per node matching the grid.
[[nodiscard]] std::vector<std::vector<double>> observe_source(
    const std::vector<std::vector<double>>& true_source_samples,
    const NoiseSpec& spec, const std::vector<double>& grid,
    std::uint64_t trial);

/// Perturbed coefficient a(t_j) + eps xi(t_j) for a single Brownian path xi.
/// Never throws on bound violations: the result reports whether the path
/// stayed inside (0, a0] and the realized minimum of a0 - path.
[[nodiscard]] CoefficientObservation observe_coefficient(
    const std::vector<double>& coefficient_samples, double a0,
    const NoiseSpec& spec, const std::vector<double>& grid,
    std::uint64_t trial);

/// Long-format CSV export of one trial's observations with the seed and
/// noise amplitudes recorded in comment lines.
void write_observed_csv(const std::string& path, const ObservedData& data,
                        const NoiseSpec& spec);

}  // namespace fracback
