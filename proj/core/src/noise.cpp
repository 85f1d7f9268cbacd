#include "fracback/noise.hpp"

#include <cmath>
#include <string>

#include "fracback/csv.hpp"
#include "fracback/errors.hpp"
#include "fracback/rng.hpp"

namespace fracback {

namespace {

void check_grid_sorted(const std::vector<double>& grid) {
  if (grid.empty()) {
    throw validation_error("time grid must be nonempty");
  }
  for (std::size_t j = 1; j < grid.size(); ++j) {
    if (!(grid[j] > grid[j - 1])) {
      throw validation_error("time grid must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> constant_sigmas(std::size_t n, double value) {
  return std::vector<double>(n, value);
}

GridSamples observe_final(const GridSamples& true_samples,
                          const NoiseSpec& spec, std::uint64_t trial) {
  const std::size_t n = true_samples.n;
  if (true_samples.values.size() != n) {
    throw validation_error("final samples must carry one value per node");
  }
  if (spec.sigma_k.size() != n) {
    throw validation_error("sigma_k has " + std::to_string(spec.sigma_k.size()) +
                           " entries for " + std::to_string(n) + " nodes");
  }
  for (double s : spec.sigma_k) {
    if (!(s >= 0.0) || !(s < spec.V_max)) {
      throw validation_error(
          "every sigma_k must lie in [0, V_max); got sigma = " +
          std::to_string(s) + " with V_max = " + std::to_string(spec.V_max));
    }
  }

  const CounterRng rng(spec.seed);
  GridSamples out = true_samples;
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] += spec.sigma_k[k] *
                     rng.normal(StreamPurpose::final_observation, trial, k, 0);
  }
  return out;
}

std::vector<std::vector<double>> observe_source(
    const std::vector<std::vector<double>>& true_source_samples,
    const NoiseSpec& spec, const std::vector<double>& grid,
    std::uint64_t trial) {
  check_grid_sorted(grid);
  if (!(spec.vartheta >= 0.0)) {
    throw validation_error("vartheta must be >= 0");
  }
  const std::size_t m = grid.size();
  for (const auto& series : true_source_samples) {
    if (series.size() != m) {
      throw validation_error("every source series must match the time grid");
    }
  }

  std::vector<std::vector<double>> out = true_source_samples;
  if (spec.vartheta == 0.0) {
    return out;  // vartheta * xi = 0 exactly; skip the draws
  }

  const CounterRng rng(spec.seed);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double xi = 0.0;  // Brownian path starts at 0
    for (std::size_t j = 1; j < m; ++j) {
      const double dt = grid[j] - grid[j - 1];
      xi += std::sqrt(dt) * rng.normal(StreamPurpose::source_noise, trial, k, j);
      out[k][j] += spec.vartheta * xi;
    }
  }
  return out;
}

CoefficientObservation observe_coefficient(
    const std::vector<double>& coefficient_samples, double a0,
    const NoiseSpec& spec, const std::vector<double>& grid,
    std::uint64_t trial) {
  check_grid_sorted(grid);
  if (coefficient_samples.size() != grid.size()) {
    throw validation_error("coefficient samples must match the time grid");
  }
  if (!(spec.eps >= 0.0)) {
    throw validation_error("eps must be >= 0");
  }

  CoefficientObservation obs;
  obs.path = coefficient_samples;
  if (spec.eps != 0.0) {
    const CounterRng rng(spec.seed);
    double xi = 0.0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double dt = grid[j] - grid[j - 1];
      xi += std::sqrt(dt) *
            rng.normal(StreamPurpose::coefficient_noise, trial, 0, j);
      obs.path[j] += spec.eps * xi;
    }
  }

  obs.within_bound = true;
  obs.realized_b0 = a0 - obs.path.front();
  for (double v : obs.path) {
    if (!(v > 0.0) || v > a0) {
      obs.within_bound = false;
    }
    obs.realized_b0 = std::min(obs.realized_b0, a0 - v);
  }
  return obs;
}

void write_observed_csv(const std::string& path, const ObservedData& data,
                        const NoiseSpec& spec) {
  CsvWriter csv(path);
  csv.comment("seed = " + std::to_string(spec.seed));
  csv.comment("V_max = " + CsvWriter::num(spec.V_max) +
              ", vartheta = " + CsvWriter::num(spec.vartheta) +
              ", eps = " + CsvWriter::num(spec.eps));
  csv.header({"kind", "node", "t", "value"});

  for (std::size_t k = 0; k < data.final_samples.values.size(); ++k) {
    csv.row({"final", CsvWriter::num(k + 1), "",
             CsvWriter::num(data.final_samples.values[k])});
  }
  for (std::size_t k = 0; k < data.source_paths.size(); ++k) {
    for (std::size_t j = 0; j < data.source_paths[k].size(); ++j) {
      csv.row({"source", CsvWriter::num(k + 1),
               CsvWriter::num(data.time_grid[j]),
               CsvWriter::num(data.source_paths[k][j])});
    }
  }
  for (std::size_t j = 0; j < data.coefficient.path.size(); ++j) {
    csv.row({"coefficient", "0", CsvWriter::num(data.time_grid[j]),
             CsvWriter::num(data.coefficient.path[j])});
  }
}

}  // namespace fracback
