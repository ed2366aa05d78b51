#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wmcvar {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitParse = 2,
  kExitValidation = 3,
  kExitWeights = 4,
  kExitVtreeMismatch = 5,
  kExitEvidence = 6,
};

/// Runs one command-line invocation. args excludes the program name.
/// Reports go to out, diagnostics to err.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

} // namespace wmcvar
