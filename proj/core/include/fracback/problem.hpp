#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fracback/spectral.hpp"

namespace fracback {

/// A pointwise nonlinearity F with declared Lipschitz data.
///
/// Globally Lipschitz entries carry the constant K; locally Lipschitz entries
/// carry the nondecreasing profile K(Q) = Lipschitz constant of F restricted
/// to [-Q, Q] (with K(Q) -> infinity). For globally Lipschitz entries the
/// profile is the constant K.
struct Nonlinearity {
  std::string name;
  std::function<double(double)> f;
  bool globally_lipschitz = false;
  double lipschitz_K = 0.0;  // valid when globally_lipschitz
  std::function<double(double)> local_K;
  bool bounded = false;  // F in L-infinity
  double sup_abs = 0.0;  // sup |F| when bounded
};

/// Built-in nonlinearities: "zero" (K = 0), "sin" (K = 1, bounded),
/// "scaled_logistic" c*u/(1+u^2) (K = c, bounded by c/2), and
/// "cubic" u - u^3 with local profile K(Q) = max(1, 3Q^2 - 1).
[[nodiscard]] std::vector<Nonlinearity> nonlinearity_catalog();

/// Look up a catalog entry by name; `scale` applies to scaled_logistic.
/// Throws validation_error for unknown names.
[[nodiscard]] Nonlinearity nonlinearity_by_name(const std::string& name,
                                                double scale = 1.0);

/// The ground-truth problem
///   u_t + a(t) (-Lap)^beta u = F(u) + g,   u(., 0) = u_0
/// on (0, pi) with Neumann boundary conditions.
struct ProblemInstance {
  double beta = 1.0;  // fractional order, > 1/2
  double T = 1.0;     // final time, > 0
  std::function<double(double)> coefficient;  // a(t), 0 < a(t) <= a0
  double a0 = 1.0;                            // declared coefficient bound
  Nonlinearity nonlinearity;
  /// Source g(., t) as a field-valued path; empty function means g = 0.
  std::function<SpectralField(double)> source;
  SpectralField initial_state;
};

/// Validates beta > 1/2, T > 0, a0 > 0, and 0 < a(t) <= a0 on a probe grid.
/// Throws validation_error on violation.
void validate(const ProblemInstance& instance);

/// Spectral trajectory of a solution: states[j] corresponds to time_grid[j],
/// with t_0 = 0 < ... < t_m = T and all states sharing one cap.
struct Trajectory {
  std::vector<double> time_grid;
  std::vector<SpectralField> states;
};

/// Uniform grid 0 = t_0 < ... < t_steps = T.
[[nodiscard]] std::vector<double> uniform_grid(double T, std::size_t steps);

}  // namespace fracback
