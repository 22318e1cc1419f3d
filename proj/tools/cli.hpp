#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bmdl::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "BMDL_OUTPUT_DIR";

/// Runs one `bmdl` invocation; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bmdl::cli
