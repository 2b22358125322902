#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace regdiv::cli {

enum ExitCode : int {
  kOk = 0,
  kBadInput = 2,
  kIoError = 3,
  kVerificationFailed = 4,
};

// Default directory for sweep output when --out-dir is not given.
inline constexpr const char* kOutputDirEnv = "REGDIV_OUTPUT_DIR";

// Entry point behind the `regdiv` executable. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace regdiv::cli
