#include "spinflip/errors.hpp"

#include <cmath>

#include "spinflip/units.hpp"

namespace spinflip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::DegenerateBranch: return "DEGENERATE_BRANCH";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::MissingTrajectory: return "MISSING_TRAJECTORY";
    case ErrorCode::ZeroAmplitude: return "ZERO_AMPLITUDE";
    case ErrorCode::MethodMismatch: return "METHOD_MISMATCH";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::BracketFailed: return "BRACKET_FAILED";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::MixedSchemas: return "MIXED_SCHEMAS";
    case ErrorCode::Io: return "IO_ERROR";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message, std::string field)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      field_(std::move(field)) {}

double wrap_phase(double phase) {
  double w = std::fmod(phase + kPi, kTwoPi);
  if (w < 0) w += kTwoPi;
  w -= kPi;
  // fmod can land exactly on +pi after the shift for inputs like -pi - eps
  if (w >= kPi) w -= kTwoPi;
  return w;
}

}  // namespace spinflip
