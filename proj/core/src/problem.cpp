#include "fracback/problem.hpp"

#include <algorithm>
#include <cmath>

#include "fracback/errors.hpp"

namespace fracback {

std::vector<Nonlinearity> nonlinearity_catalog() {
  std::vector<Nonlinearity> catalog;

  Nonlinearity zero;
  zero.name = "zero";
  zero.f = [](double) { return 0.0; };
  zero.globally_lipschitz = true;
  zero.lipschitz_K = 0.0;
  zero.local_K = [](double) { return 0.0; };
  zero.bounded = true;
  zero.sup_abs = 0.0;
  catalog.push_back(zero);

  Nonlinearity sine;
  sine.name = "sin";
  sine.f = [](double u) { return std::sin(u); };
  sine.globally_lipschitz = true;
  sine.lipschitz_K = 1.0;
  sine.local_K = [](double) { return 1.0; };
  sine.bounded = true;
  sine.sup_abs = 1.0;
  catalog.push_back(sine);

  catalog.push_back(nonlinearity_by_name("scaled_logistic", 1.0));

  Nonlinearity cubic;
  cubic.name = "cubic";
  cubic.f = [](double u) { return u - u * u * u; };
  cubic.globally_lipschitz = false;
  cubic.lipschitz_K = 0.0;
  // sup over |xi| <= Q of |1 - 3 xi^2|.
  cubic.local_K = [](double Q) { return std::max(1.0, 3.0 * Q * Q - 1.0); };
  cubic.bounded = false;
  cubic.sup_abs = 0.0;
  catalog.push_back(cubic);

  return catalog;
}

Nonlinearity nonlinearity_by_name(const std::string& name, double scale) {
  if (name == "scaled_logistic") {
    Nonlinearity logistic;
    logistic.name = "scaled_logistic";
    logistic.f = [scale](double u) { return scale * u / (1.0 + u * u); };
    // d/du [u/(1+u^2)] = (1-u^2)/(1+u^2)^2, maximal modulus 1 at u = 0.
    logistic.globally_lipschitz = true;
    logistic.lipschitz_K = scale;
    logistic.local_K = [scale](double) { return scale; };
    logistic.bounded = true;
    logistic.sup_abs = scale / 2.0;
    return logistic;
  }
  for (auto& entry : nonlinearity_catalog()) {
    if (entry.name == name) return entry;
  }
  throw validation_error("unknown nonlinearity: " + name);
}

void validate(const ProblemInstance& instance) {
  if (!(instance.beta > 0.5)) {
    throw validation_error("problem: beta must be > 1/2, got " +
                           std::to_string(instance.beta));
  }
  if (!(instance.T > 0.0)) {
    throw validation_error("problem: final time must be > 0, got " +
                           std::to_string(instance.T));
  }
  if (!(instance.a0 > 0.0)) {
    throw validation_error("problem: coefficient bound a0 must be > 0");
  }
  if (!instance.coefficient) {
    throw validation_error("problem: coefficient function not set");
  }
  const std::size_t probes = 101;
  for (std::size_t i = 0; i < probes; ++i) {
    const double t =
        instance.T * static_cast<double>(i) / static_cast<double>(probes - 1);
    const double a = instance.coefficient(t);
    if (!(a > 0.0) || a > instance.a0 + 1e-12) {
      throw validation_error("problem: coefficient a(" + std::to_string(t) +
                             ") = " + std::to_string(a) +
                             " outside (0, a0] with a0 = " +
                             std::to_string(instance.a0));
    }
  }
  if (!instance.nonlinearity.f) {
    throw validation_error("problem: nonlinearity function not set");
  }
}

std::vector<double> uniform_grid(double T, std::size_t steps) {
  if (!(T > 0.0) || steps < 1) {
    throw validation_error("uniform_grid: need T > 0 and steps >= 1");
  }
  std::vector<double> grid(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) {
    grid[j] = T * static_cast<double>(j) / static_cast<double>(steps);
  }
  grid.back() = T;
  return grid;
}

}  // namespace fracback
