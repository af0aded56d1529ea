#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qrcd::cli {

// Process exit codes of the qrcd command.
enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,  // validate found errors
  kUsage = 2,             // bad flags, bad config file
  kIo = 3,                // unreadable input or unwritable output
  kParse = 4,             // malformed dataset or run file
  kContract = 5,          // evaluation contract broken (strict checks, k_max conflicts)
};

// Runs one subcommand (validate, stats, eval, ensemble, compare). `args`
// excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qrcd::cli
