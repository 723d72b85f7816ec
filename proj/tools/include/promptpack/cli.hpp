#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace promptpack::cli {

enum ExitStatus : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kProviderFailure = 3,
};

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace promptpack::cli
