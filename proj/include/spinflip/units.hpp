#pragma once

#include <numbers>

namespace spinflip {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Public inputs are ordinary frequencies in MHz and times in us. Everything
// inside the library is angular: rad/us.
constexpr double from_mhz(double f_mhz) { return kTwoPi * f_mhz; }
constexpr double to_mhz(double omega) { return omega / kTwoPi; }

// Wraps a phase into [-pi, pi).
double wrap_phase(double phase);

}  // namespace spinflip
