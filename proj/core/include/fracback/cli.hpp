#pragma once

namespace fracback {

/// Entry point of the command-line driver.
///
/// Subcommands: `forward` (solve and dump the reference trajectory),
/// `regularize` (one noisy trial), `mise` (Monte Carlo error estimate),
/// `sweep` (convergence-rate study over sample counts), and `check`
/// (cross-module invariant suite).  Returns 0 on success, 1 for invalid
/// input or configuration, and 2 for numerical failures.
int cli_main(int argc, const char* const* argv);

}  // namespace fracback
