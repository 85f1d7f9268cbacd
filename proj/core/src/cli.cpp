#include "fracback/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fracback/errors.hpp"
#include "fracback/forward.hpp"
#include "fracback/harness.hpp"

namespace fracback {

namespace {

void print_config_schema(std::ostream& out) {
  out << "Expected configuration keys (one `key = value` per line, '#' "
         "comments):\n"
      << "  problem.id                 report file prefix (default "
         "'experiment')\n"
      << "  method                     first_truncation | second_truncation "
         "| quasi_reversibility\n"
      << "  problem.beta               fractional order, > 1/2\n"
      << "  problem.T                  final time, > 0\n"
      << "  problem.a0                 diffusion floor, > 0\n"
      << "  problem.coefficient        one | constant:v | affine:p,q  "
         "(a(t) = p + q t)\n"
      << "  problem.nonlinearity       zero | sin | scaled_logistic | cubic\n"
      << "  problem.nonlinearity_scale catalog scale factor (default 1)\n"
      << "  problem.u0                 zero | phi:p | modes:p=c,p=c,...\n"
      << "  problem.source             zero | phi:p | modes:p=c,p=c,...\n"
      << "  n                          spatial sample count, >= 2\n"
      << "  noise.sigma                per-node noise level sigma_k\n"
      << "  noise.V_max                noise amplitude cap V_max\n"
      << "  noise.vartheta             source noise amplitude\n"
      << "  noise.eps                  coefficient noise amplitude\n"
      << "  seed                       base RNG seed (unsigned)\n"
      << "  params.M_n                 frequency cutoff (0 = choose from n)\n"
      << "  params.sigma_rate          rate exponent sigma in (0, 1)\n"
      << "  params.Q_n                 clamping level (0 = choose from n, "
         "inf = none)\n"
      << "  params.picard_tol          fixed-point stopping tolerance\n"
      << "  params.picard_max_iters    fixed-point iteration cap\n"
      << "  grid.steps                 time steps of the uniform grid\n"
      << "  grid.cap                   spectral cap of the reference solve\n"
      << "  trials                     Monte Carlo trial count\n"
      << "  workers                    worker threads (0 = hardware)\n"
      << "  sweep.n_list               comma-separated sample counts, "
         "increasing\n"
      << "  eval.times                 comma-separated report times in "
         "[0, T]\n"
      << "  out.dir                    output directory (default '.')\n"
      << "  bounds.kind                estimate1 | estimate2 | second | qr\n"
      << "  bounds.alpha               extra smoothness exponent alpha\n"
      << "  bounds.gamma_source        source smoothness exponent gamma\n"
      << "  bounds.E2                  source budget override (0 = compute)\n"
      << "  bounds.P1                  stability budget override (0 = "
         "compute)\n"
      << "  bounds.P2                  weighted budget override (0 = "
         "compute)\n"
      << "  bounds.gamma_u             initial-state smoothness exponent\n"
      << "  bounds.delta               aliasing-constant exponent delta "
         "(> 1)\n";
}

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::string method;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  bool seed_set = false;
  bool out_set = false;
  bool method_set = false;
  bool trials_set = false;
};

ExperimentConfig load_with_overrides(const CliOptions& options) {
  ExperimentConfig config;
  try {
    config = load_config(options.config_path);
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    print_config_schema(std::cerr);
    throw;
  }
  if (options.seed_set) {
    config.seed = options.seed;
  } else if (const char* env = std::getenv("FRACBACK_SEED")) {
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
      value = std::stoull(env, &used);
    } catch (const std::exception&) {
      throw validation_error("FRACBACK_SEED must be an unsigned integer");
    }
    if (used != std::string(env).size()) {
      throw validation_error("FRACBACK_SEED must be an unsigned integer");
    }
    config.seed = value;
  }
  if (options.method_set) {
    config.method = method_by_name(options.method);
  }
  if (options.trials_set) {
    config.trials = options.trials;
  }
  if (options.out_set) {
    config.out_dir = options.out_dir;
  }
  return config;
}

std::string output_path(const ExperimentConfig& config,
                        const std::string& suffix) {
  std::filesystem::create_directories(config.out_dir);
  return (std::filesystem::path(config.out_dir) / (config.id + suffix))
      .string();
}

int run_forward(const ExperimentConfig& config) {
  const ExperimentContext ctx = make_context(config);
  const std::string path = output_path(config, "_trajectory.csv");
  write_trajectory_csv(path, ctx.truth);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_regularize(const ExperimentConfig& config) {
  const ExperimentContext ctx = make_context(config);

  const NoiseSpec spec = make_noise_spec(config, ctx.n);
  ObservedData observed;
  observed.time_grid = ctx.grid;
  observed.final_samples = observe_final(ctx.true_final, spec, 0);
  if (!ctx.true_source.empty()) {
    observed.source_paths = observe_source(ctx.true_source, spec, ctx.grid, 0);
  }
  observed.coefficient =
      observe_coefficient(ctx.coefficient_samples, config.a0, spec, ctx.grid,
                          0);
  const std::string observed_path = output_path(config, "_observed.csv");
  write_observed_csv(observed_path, observed, spec);

  const TrialReport report = run_trial(ctx, 0);
  const std::string csv_path = output_path(config, "_trial.csv");
  write_trial_csv(csv_path, report);
  const std::string json_path = output_path(config, "_trial.json");
  write_trial_json(json_path, config, report);
  std::cout << "wrote " << observed_path << "\n"
            << "wrote " << csv_path << "\n"
            << "wrote " << json_path << "\n";
  return 0;
}

int run_mise(const ExperimentConfig& config) {
  const ExperimentContext ctx = make_context(config);
  const MiseResult result = estimate_mise(ctx);
  const BoundReport bounds = evaluate_bounds(ctx, result.min_realized_b0);
  const std::string csv_path = output_path(config, "_mise.csv");
  write_mise_csv(csv_path, result, bounds);
  const std::string json_path = output_path(config, "_mise.json");
  write_mise_json(json_path, config, result, bounds);
  std::cout << "wrote " << csv_path << "\n"
            << "wrote " << json_path << "\n";
  return 0;
}

int run_sweep(const ExperimentConfig& config) {
  const SweepResult result = rate_sweep(config);
  const std::string path = output_path(config, "_sweep.csv");
  write_sweep_csv(path, result);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_check() {
  const std::vector<InvariantResult> results = run_invariant_suite();
  bool all_passed = true;
  for (const InvariantResult& r : results) {
    if (r.passed) {
      std::cout << "PASS " << r.name << "\n";
    } else {
      all_passed = false;
      std::cout << "FAIL " << r.name << ": " << r.detail << "\n";
    }
  }
  return all_passed ? 0 : 1;
}

int run(int argc, const char* const* argv) {
  CLI::App app{
      "Backward space-fractional diffusion: regularization and Monte Carlo "
      "error studies"};
  app.require_subcommand(1);

  CliOptions options;
  const auto add_common = [&options](CLI::App* sub) {
    sub->add_option("--config", options.config_path,
                    "configuration file (key = value lines)")
        ->required();
    sub->add_option("--seed", options.seed, "override the RNG seed");
    sub->add_option("--out", options.out_dir, "override the output directory");
    sub->add_option("--trials", options.trials,
                    "override the Monte Carlo trial count");
    sub->add_option("--method", options.method,
                    "override the regularization method");
  };

  CLI::App* forward =
      app.add_subcommand("forward", "solve the reference trajectory");
  add_common(forward);
  CLI::App* regularize =
      app.add_subcommand("regularize", "run one noisy trial");
  add_common(regularize);
  CLI::App* mise = app.add_subcommand(
      "mise", "estimate the mean integrated squared error");
  add_common(mise);
  CLI::App* sweep = app.add_subcommand(
      "sweep", "convergence-rate study over a list of sample counts");
  add_common(sweep);
  CLI::App* check =
      app.add_subcommand("check", "run the cross-module invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::RequiredError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    print_config_schema(std::cerr);
    return 1;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (check->parsed()) {
    return run_check();
  }

  const auto fill = [&](const CLI::App* sub) {
    options.seed_set = sub->count("--seed") > 0;
    options.out_set = sub->count("--out") > 0;
    options.method_set = sub->count("--method") > 0;
    options.trials_set = sub->count("--trials") > 0;
  };

  if (forward->parsed()) {
    fill(forward);
    return run_forward(load_with_overrides(options));
  }
  if (regularize->parsed()) {
    fill(regularize);
    return run_regularize(load_with_overrides(options));
  }
  if (mise->parsed()) {
    fill(mise);
    return run_mise(load_with_overrides(options));
  }
  fill(sweep);
  return run_sweep(load_with_overrides(options));
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(argc, argv);
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace fracback
