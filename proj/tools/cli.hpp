#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hcf::cli {

// Exit codes.
enum Exit : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kGenerationFailed = 3,
  kBudgetExceeded = 4,
  kCheckFailed = 5,
  kOverflow = 6,
  kShearMismatch = 7,
  kIo = 8,
  kScheduleMismatch = 9,
  kGammaZero = 10,
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hcf::cli
