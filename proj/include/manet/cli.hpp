#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace manet {

/// Exit codes returned by cli_main.
inline constexpr int kExitOk = 0;
/// Bad input: malformed or invalid scenario, unknown name, usage error.
inline constexpr int kExitInvalid = 1;
/// Anything that went wrong while running a valid scenario.
inline constexpr int kExitRuntime = 2;

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace manet
