#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bolostat {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNotConverged = 2 };

/// Command-line entry point. args[0] is the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

} // namespace bolostat
