#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinflip {

enum class ErrorCode {
  InvalidArgument,
  DegenerateBranch,
  DimensionMismatch,
  MissingTrajectory,
  ZeroAmplitude,
  MethodMismatch,
  NoConvergence,
  BracketFailed,
  ConfigInvalid,
  MixedSchemas,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code is machine readable, the message names the
/// offending field or state where one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace spinflip
