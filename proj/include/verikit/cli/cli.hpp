#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace verikit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInvalidPremises = 3;

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies VERIKIT_LOG (trace, debug, info, warn, error, critical, off) to
/// the process-wide logger, which writes to stderr. Defaults to warn.
void configure_logging();

std::string version();

}  // namespace verikit::cli
