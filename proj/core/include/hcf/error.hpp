#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hcf {

enum class ErrorCode {
  ShearMismatch,
  BudgetExceeded,
  LevelOutOfRange,
  Overflow,
  GenerationFailed,
  GammaZero,
  ConfigError,
  ReportFail,
  ScheduleMismatch,
  IoError,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hcf
