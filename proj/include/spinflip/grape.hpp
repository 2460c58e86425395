#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "spinflip/propagator.hpp"

namespace spinflip {

enum class CostKind { Fidelity, FidelityMinusTrPenalty };

/// Waveform optimization target. A plain GRAPE problem has one system with
/// weight 1; an ensemble (robust) problem lists several perturbed systems.
struct ControlProblem {
  std::vector<ControlSystem> systems;
  std::vector<double> weights;
  int n_segments = 40;
  double tau = 1.0;
  CostKind cost = CostKind::Fidelity;
  double tr_penalty = 0.0;
  int substeps = 32;  ///< quadrature points per segment for the T_r penalty

  static ControlProblem single(ControlSystem system, int n_segments, double tau);
  /// Throws INVALID_ARGUMENT on N < 2, tau <= 0, bad weights or mixed bases.
  void validate() const;
  ControlProblem with_tau(double new_tau) const;
};

struct CostEvaluation {
  double objective = 0.0;  ///< weighted F, minus tr_penalty * T_r when penalized
  double fidelity = 0.0;   ///< weighted F
  double t_r = 0.0;        ///< weighted T_r (only computed when penalized)
  std::vector<double> gradient;  ///< d objective / d xi_i, empty unless requested
};

CostEvaluation evaluate_cost(const ControlProblem& problem, const std::vector<double>& phases,
                             bool want_gradient);

/// Weighted CZ fidelity of a waveform.
double problem_fidelity(const ControlProblem& problem, const PhaseWaveform& wf);

/// Exact dF/dxi_i of the (weighted) fidelity.
std::vector<double> fidelity_gradient(const ControlProblem& problem, const PhaseWaveform& wf);

struct OptimizeOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-12;
  int restarts = 4;  ///< total number of runs, the first starts from `init`
  std::uint64_t seed = 1;
  /// Success threshold: converged once F >= 1 - epsilon_f.
  double epsilon_f = 1e-4;
  /// A single run stops early once its infidelity drops below
  /// epsilon_f * stop_fraction.
  double stop_fraction = 0.1;
};

struct OptimizeResult {
  PhaseWaveform waveform;  ///< phases wrapped to [-pi, pi)
  double fidelity = 0.0;
  double objective = 0.0;
  std::vector<double> trace;  ///< best-so-far objective per iteration, all runs
  std::vector<double> run_objectives;
  int iterations = 0;
  bool converged = false;
};

/// Multi-start L-BFGS ascent. Restart r >= 1 draws phases uniformly from
/// [-pi, pi) with a generator seeded by derive_seed(seed, r). Not converging
/// is reported through `converged`, never thrown.
OptimizeResult optimize_waveform(const ControlProblem& problem, const PhaseWaveform& init,
                                 const OptimizeOptions& opts);

struct QslOptions {
  double epsilon = 1e-4;
  double tau_lo = 0.5;
  double tau_hi = 3.0;
  double rel_tol = 0.01;  ///< stop once the bracket is narrower than rel_tol * tau*
  int max_extensions = 6;
  double extension_factor = 1.5;
};

struct QslProbe {
  double tau = 0.0;
  double fidelity = 0.0;
  bool reached = false;
};

struct QslResult {
  double tau_star = 0.0;
  double fidelity = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::vector<QslProbe> probes;  ///< sorted by tau
  PhaseWaveform waveform;        ///< optimized waveform at tau_star
};

using ProblemFamily = std::function<ControlProblem(double tau)>;

/// Bisection for the shortest tau reaching F >= 1 - epsilon. Each probe is
/// warm-started from the converged waveform nearest in tau. The bracket is
/// widened by extension_factor when its ends do not straddle the threshold;
/// BRACKET_FAILED if no probe reaches the threshold or none fails.
QslResult qsl_search(const ProblemFamily& family, const QslOptions& qsl,
                     const OptimizeOptions& opts,
                     const std::optional<PhaseWaveform>& init = std::nullopt);

}  // namespace spinflip
