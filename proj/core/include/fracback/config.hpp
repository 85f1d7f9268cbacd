#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "fracback/problem.hpp"

namespace fracback {

/// Flat key-value configuration text: one `key = value` pair per line,
/// '#' starts a comment, dot-separated key paths, no nesting. Duplicate or
/// unknown keys are rejected.
using ConfigMap = std::map<std::string, std::string>;

/// Parses configuration text into a key-value map. Throws validation_error
/// on malformed lines or duplicate keys.
[[nodiscard]] ConfigMap parse_config_text(const std::string& text);

/// Reads and parses a configuration file. Throws validation_error when the
/// file cannot be read.
[[nodiscard]] ConfigMap parse_config_file(const std::string& path);

/// Regularization method selector.
enum class Method { first_truncation, second_truncation, quasi_reversibility };

[[nodiscard]] std::string method_name(Method method);
[[nodiscard]] Method method_by_name(const std::string& name);

/// One experiment: problem, method, noise amplitudes, regularizer controls,
/// Monte Carlo size, and reporting exponents. Field/coefficient selections
/// stay textual so configs round-trip; build_instance materializes them.
struct ExperimentConfig {
  std::string id = "experiment";
  Method method = Method::first_truncation;

  double beta = 1.0;
  double T = 1.0;
  double a0 = 1.0;
  std::string coefficient_text = "one";   // one | constant:v | affine:p,q
  std::string nonlinearity_name = "zero"; // catalog name
  double nonlinearity_scale = 1.0;        // scaled_logistic only
  std::string u0_text = "zero";           // zero | phi:p | modes:p=c,...
  std::string source_text = "zero";       // time-constant source field

  std::size_t n = 256;      // spatial sample count
  double noise_sigma = 0.0; // constant per-node final-value deviation
  double V_max = 1.0;
  double vartheta = 0.0;
  double eps = 0.0;
  std::uint64_t seed = 0;

  std::size_t M_n = 0;      // 0 = select via choose_M_n
  double sigma_rate = 0.5;  // rate exponent for choose_M_n
  double Q_n = std::numeric_limits<double>::infinity();  // 0 = choose_Q_n
  double picard_tol = 1e-10;
  std::size_t picard_max_iters = 200;

  std::size_t grid_steps = 64;
  std::size_t cap = 32;  // spectral cap of the truth and the regularizers
  std::size_t trials = 1;
  std::size_t workers = 1;  // trial worker pool; 0 = hardware concurrency
  std::vector<std::size_t> sweep_n;  // strictly increasing sample counts
  std::vector<double> eval_times;    // empty = every grid node
  std::string out_dir = ".";

  std::string bound_kind = "estimate1";  // estimate1 | estimate2 | second | qr
  double alpha = 1.0;         // spectral-decay exponent
  double gamma_source = 2.0;  // source-smoothness exponent
  double E2 = 0.0;            // source-smoothness budget (0 = compute)
  double P1 = 0.0;            // stability budget (0 = compute)
  double P2 = 0.0;            // weighted stability budget (0 = compute)
  double gamma_u = 1.0;       // Sobolev order of u(., 0)
  double delta = 2.0;         // aliasing-constant smoothness order
};

/// Builds a config from parsed keys, starting from the defaults above.
/// Unknown keys throw validation_error naming the key.
[[nodiscard]] ExperimentConfig config_from_map(const ConfigMap& map);

/// parse_config_file + config_from_map + validate.
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Checks the cross-field invariants: trials >= 1, strictly increasing sweep
/// list, evaluation times within [0, T], and parseable field/coefficient
/// selections. Throws validation_error on violation.
void validate(const ExperimentConfig& config);

/// Field selections: "zero", "phi:p" (unit mode p), or
/// "modes:p=c,p=c,..." (explicit coefficients).
[[nodiscard]] SpectralField parse_field(const std::string& text);

/// Coefficient selections: "one", "constant:v", or "affine:p,q" for
/// a(t) = p + q t.
[[nodiscard]] std::function<double(double)> parse_coefficient(
    const std::string& text);

/// Materializes the ground-truth problem described by the config.
[[nodiscard]] ProblemInstance build_instance(const ExperimentConfig& config);

}  // namespace fracback
