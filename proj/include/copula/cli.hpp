#pragma once

#include <ostream>

namespace copula::cli {

enum ExitCode : int { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

/// Entry point for the `copula-impute` tool. Subcommands: fit, impute,
/// simulate, evaluate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace copula::cli
