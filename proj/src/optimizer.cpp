#include "spinflip/optimizer.hpp"

#include <cmath>

#include <ceres/ceres.h>

#include "spinflip/errors.hpp"

namespace spinflip {

namespace {

class Adapter final : public ceres::FirstOrderFunction {
 public:
  Adapter(const CostWithGradient& cost, int n) : cost_(cost), n_(n), x_(n), grad_(n) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    x_.assign(parameters, parameters + n_);
    const double c = cost_(x_, gradient ? &grad_ : nullptr);
    if (!std::isfinite(c)) return false;
    *cost = c;
    if (gradient) std::copy(grad_.begin(), grad_.end(), gradient);
    ++evaluations_;
    if (best_x_.empty() || c < best_cost_) {
      best_cost_ = c;
      best_x_ = x_;
    }
    return true;
  }
  int NumParameters() const override { return n_; }

  const std::vector<double>& best_x() const { return best_x_; }
  double best_cost() const { return best_cost_; }
  int evaluations() const { return evaluations_; }

 private:
  const CostWithGradient& cost_;
  int n_;
  mutable std::vector<double> x_;
  mutable std::vector<double> grad_;
  mutable std::vector<double> best_x_;
  mutable double best_cost_ = 0.0;
  mutable int evaluations_ = 0;
};

class StopBelow final : public ceres::IterationCallback {
 public:
  explicit StopBelow(double threshold) : threshold_(threshold) {}
  ceres::CallbackReturnType operator()(const ceres::IterationSummary& s) override {
    return s.cost <= threshold_ ? ceres::SOLVER_TERMINATE_SUCCESSFULLY : ceres::SOLVER_CONTINUE;
  }

 private:
  double threshold_;
};

}  // namespace

LbfgsResult lbfgs_minimize(const CostWithGradient& cost, std::vector<double> x0,
                           const LbfgsOptions& opts) {
  if (x0.empty()) throw Error(ErrorCode::InvalidArgument, "no parameters to optimize");
  if (opts.max_iterations < 0) throw Error(ErrorCode::InvalidArgument, "max_iterations < 0");
  const int n = static_cast<int>(x0.size());

  // GradientProblem takes ownership of the function; keep a raw handle for
  // the best-point bookkeeping.
  auto* adapter = new Adapter(cost, n);
  ceres::GradientProblem problem(adapter);

  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.line_search_type = ceres::WOLFE;
  options.max_num_iterations = opts.max_iterations;
  options.function_tolerance = opts.function_tolerance;
  options.gradient_tolerance = opts.gradient_tolerance;
  options.parameter_tolerance = opts.parameter_tolerance;
  options.logging_type = ceres::SILENT;
  options.minimizer_progress_to_stdout = false;
  StopBelow stop(opts.stop_cost);
  if (std::isfinite(opts.stop_cost)) options.callbacks.push_back(&stop);

  ceres::GradientProblemSolver::Summary summary;
  std::vector<double> x = x0;
  ceres::Solve(options, problem, x.data(), &summary);

  LbfgsResult out;
  if (adapter->evaluations() == 0) {
    out.x = x0;
    out.cost = cost(x0, nullptr);
  } else {
    out.x = adapter->best_x();
    out.cost = adapter->best_cost();
  }
  out.evaluations = adapter->evaluations();
  out.iterations = summary.iterations.empty() ? 0 : static_cast<int>(summary.iterations.size()) - 1;
  for (const auto& it : summary.iterations) out.iteration_costs.push_back(it.cost);
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace spinflip
