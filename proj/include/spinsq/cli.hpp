#pragma once

// Command-line front end: parameter sweeps, Wigner-field export, Monte Carlo
// validation runs, and physical-design calculators, with deterministic CSV or
// JSON output.

namespace spinsq {

// Parses argv and dispatches to a subcommand. Exit codes: 0 on success,
// 2 for usage or domain errors, 3 for numerical-contract failures.
int run_cli(int argc, const char* const* argv);

}  // namespace spinsq
