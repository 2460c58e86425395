#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace spinflip {

/// Cost with optional gradient output (grad is null when only the value is
/// needed, otherwise it is pre-sized to x.size()).
using CostWithGradient = std::function<double(const std::vector<double>& x, std::vector<double>* grad)>;

struct LbfgsOptions {
  int max_iterations = 500;
  double function_tolerance = 1e-12;
  double gradient_tolerance = 1e-12;
  double parameter_tolerance = 1e-14;
  /// Stop as soon as an accepted iterate has cost at or below this value.
  double stop_cost = -std::numeric_limits<double>::infinity();
};

struct LbfgsResult {
  std::vector<double> x;  ///< best point evaluated
  double cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  /// Cost of the accepted iterate after each iteration (iteration 0 first).
  std::vector<double> iteration_costs;
};

/// Quasi-Newton (L-BFGS, Wolfe line search) minimization. Single threaded and
/// deterministic for a deterministic cost.
LbfgsResult lbfgs_minimize(const CostWithGradient& cost, std::vector<double> x0,
                           const LbfgsOptions& opts);

/// splitmix64 finalizer: well-mixed 64-bit output for any input.
std::uint64_t splitmix64(std::uint64_t x);
/// Independent sub-seed for stream `stream` of base seed `base` (restarts,
/// grid points). Derived seeds never depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace spinflip
