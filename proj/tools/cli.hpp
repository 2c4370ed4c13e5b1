#pragma once

#include <iosfwd>

namespace dsgp4kit::cli {

enum Exit : int {
  kOk = 0,
  kItemErrors = 2,
  kNonConvergence = 3,
  kUsage = 64,
  kData = 65,
};

/// Whole command line; output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dsgp4kit::cli
