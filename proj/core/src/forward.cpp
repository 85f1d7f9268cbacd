#include "fracback/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fracback/csv.hpp"
#include "fracback/errors.hpp"

namespace fracback {

namespace {

constexpr double kExpGuard = 700.0;

void check_grid(const std::vector<double>& grid, double T) {
  if (grid.size() < 2) {
    throw validation_error("time grid needs at least two nodes");
  }
  const double tol = 1e-12 * std::max(1.0, T);
  if (std::abs(grid.front()) > tol) {
    throw validation_error("time grid must start at t = 0");
  }
  if (std::abs(grid.back() - T) > tol) {
    throw validation_error("time grid must end at t = T");
  }
  for (std::size_t j = 1; j < grid.size(); ++j) {
    if (!(grid[j] > grid[j - 1])) {
      throw validation_error("time grid must be strictly increasing");
    }
  }
}

/// N(t, u) = F(u) + g(t), truncated at cap.
SpectralField rhs_at(const ProblemInstance& inst, double t,
                     const SpectralField& u, std::size_t cap) {
  SpectralField out = apply_pointwise(inst.nonlinearity, u, cap);
  if (inst.source) {
    out = add_scaled(out, inst.source(t), 1.0);
    out.coeffs.resize(cap + 1, 0.0);
  }
  return out;
}

Trajectory run_solve(const ProblemInstance& inst,
                     const std::vector<double>& grid, std::size_t cap) {
  const std::size_t m = grid.size() - 1;

  std::vector<double> kappa(cap + 1, 0.0);
  for (std::size_t p = 1; p <= cap; ++p) {
    kappa[p] = std::pow(static_cast<double>(p), 2.0 * inst.beta);
  }

  Trajectory traj;
  traj.time_grid = grid;
  traj.states.reserve(m + 1);

  SpectralField u = inst.initial_state;
  u.coeffs.resize(cap + 1, 0.0);
  traj.states.push_back(u);

  SpectralField pred(cap);
  SpectralField next(cap);
  for (std::size_t j = 0; j < m; ++j) {
    const double t0 = grid[j];
    const double t1 = grid[j + 1];
    const double h = t1 - t0;
    // Simpson quadrature of the diffusion coefficient over the step.
    const double ia = h / 6.0 *
                      (inst.coefficient(t0) + 4.0 * inst.coefficient(0.5 * (t0 + t1)) +
                       inst.coefficient(t1));

    const SpectralField rhs0 = rhs_at(inst, t0, u, cap);
    for (std::size_t p = 0; p <= cap; ++p) {
      const double decay = std::exp(-kappa[p] * ia);
      pred.coeffs[p] = decay * (u.coeffs[p] + h * rhs0.coeffs[p]);
    }
    const SpectralField rhs1 = rhs_at(inst, t1, pred, cap);
    for (std::size_t p = 0; p <= cap; ++p) {
      const double decay = std::exp(-kappa[p] * ia);
      next.coeffs[p] = decay * u.coeffs[p] +
                       0.5 * h * (decay * rhs0.coeffs[p] + rhs1.coeffs[p]);
    }
    u = next;
    traj.states.push_back(u);
  }
  return traj;
}

std::vector<double> halve_grid(const std::vector<double>& grid) {
  std::vector<double> fine;
  fine.reserve(2 * grid.size() - 1);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    fine.push_back(grid[j]);
    fine.push_back(0.5 * (grid[j] + grid[j + 1]));
  }
  fine.push_back(grid.back());
  return fine;
}

}  // namespace

SpectralField apply_pointwise(const Nonlinearity& F, const SpectralField& field,
                              std::size_t cap) {
  if (!F.f) {
    throw validation_error("nonlinearity '" + F.name + "' has no function");
  }
  GridSamples samples = synthesize(field, 2 * cap + 2);
  for (double& v : samples.values) {
    v = F.f(v);
  }
  return project(samples, cap);
}

Trajectory forward_solve(const ProblemInstance& instance,
                         const std::vector<double>& grid, std::size_t cap,
                         std::optional<double> refine_tol) {
  validate(instance);
  check_grid(grid, instance.T);

  Trajectory coarse = run_solve(instance, grid, cap);
  if (refine_tol) {
    const Trajectory fine = run_solve(instance, halve_grid(grid), cap);
    const double shift =
        l2_distance(coarse.states.back(), fine.states.back());
    if (shift > *refine_tol) {
      throw numerical_error(
          "forward solve not resolved: halving the grid moved u(., T) by " +
          std::to_string(shift) + " > tolerance " +
          std::to_string(*refine_tol));
    }
  }
  return coarse;
}

double mild_residual(const Trajectory& traj, const ProblemInstance& instance,
                     std::size_t* excluded_pairs) {
  if (traj.time_grid.size() < 2 ||
      traj.states.size() != traj.time_grid.size()) {
    throw validation_error("trajectory must pair each time with a state");
  }
  const double T = traj.time_grid.back();
  for (double t : traj.time_grid) {
    if (std::abs(instance.coefficient(t) - 1.0) > 1e-12) {
      throw validation_error(
          "mild-representation check requires a(t) = 1 on the grid");
    }
  }

  const std::size_t m = traj.time_grid.size() - 1;
  const std::size_t cap = traj.states.front().cap();
  for (const SpectralField& s : traj.states) {
    if (s.cap() != cap) {
      throw validation_error("trajectory states must share one mode cap");
    }
  }

  std::vector<SpectralField> rhs(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    rhs[j] = rhs_at(instance, traj.time_grid[j], traj.states[j], cap);
  }

  std::vector<double> sumsq(m + 1, 0.0);
  std::size_t excluded = 0;
  for (std::size_t p = 0; p <= cap; ++p) {
    const double kappa =
        p == 0 ? 0.0 : std::pow(static_cast<double>(p), 2.0 * instance.beta);
    // Suffix trapezoid recurrence for J_j = int_{t_j}^T e^{(s-t_j) kappa} N_p.
    double J = 0.0;
    for (std::size_t back = 0; back <= m; ++back) {
      const std::size_t j = m - back;
      const double amp = (T - traj.time_grid[j]) * kappa;
      if (amp > kExpGuard) {
        excluded += j + 1;  // this pair and every earlier time for this mode
        break;
      }
      if (j < m) {
        const double h = traj.time_grid[j + 1] - traj.time_grid[j];
        const double grow = std::exp(h * kappa);
        J = grow * J + 0.5 * h * (rhs[j].coeffs[p] + grow * rhs[j + 1].coeffs[p]);
      }
      const double represented =
          std::exp(amp) * traj.states[m].coeffs[p] - J;
      const double r = traj.states[j].coeffs[p] - represented;
      sumsq[j] += r * r;
    }
  }
  if (excluded_pairs != nullptr) {
    *excluded_pairs = excluded;
  }

  double worst = 0.0;
  for (double s : sumsq) {
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  if (traj.states.size() != traj.time_grid.size()) {
    throw validation_error("trajectory must pair each time with a state");
  }
  CsvWriter csv(path);
  csv.header({"t", "p", "coefficient"});
  for (std::size_t j = 0; j < traj.time_grid.size(); ++j) {
    for (std::size_t p = 0; p < traj.states[j].coeffs.size(); ++p) {
      csv.row({CsvWriter::num(traj.time_grid[j]), CsvWriter::num(p),
               CsvWriter::num(traj.states[j].coeffs[p])});
    }
  }
}

}  // namespace fracback
