#pragma once

#include <iosfwd>

namespace comboreg::cli {

/// Exit codes: 0 success, 1 input/config error, 2 numerical nonconvergence.
enum ExitCode : int { kOk = 0, kInputError = 1, kNotConverged = 2 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace comboreg::cli
