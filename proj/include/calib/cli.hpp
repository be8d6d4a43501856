#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace calib::cli {

enum ExitCode : int {
    kOk = 0,
    kAssertionFailed = 1,
    kInputError = 2,
    kFitError = 3,
};

// Runs one command line (args excludes the program name). Regular output goes
// to `out`, diagnostics to `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace calib::cli
