#include "spinflip/grape.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "spinflip/errors.hpp"
#include "spinflip/gate_metrics.hpp"
#include "spinflip/linalg.hpp"
#include "spinflip/optimizer.hpp"
#include "spinflip/units.hpp"

namespace spinflip {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

const char* const kComputational[4] = {"00", "01", "10", "11"};

// R(xi) U R(xi)^dagger with R = exp(i xi diag(n)).
MatrixXcd rotate(const MatrixXcd& u, const Eigen::VectorXd& n, double xi) {
  const int d = static_cast<int>(n.size());
  Eigen::VectorXcd ph(d);
  for (int j = 0; j < d; ++j) ph(j) = std::polar(1.0, xi * n(j));
  return ph.asDiagonal() * u * ph.conjugate().asDiagonal();
}

struct MemberResult {
  double fidelity = 0.0;
  double t_r = 0.0;
  std::vector<double> grad_f;
  std::vector<double> grad_t;
};

// Fidelity (and Rydberg time when asked) of one system plus exact gradients.
//
// The phase covariance H(xi) = R H(0) R^dagger gives
//   dU_i/dxi_i = i (N U_i - U_i N),
// so with forward kets psi(i) and backward bras chi(i) for each computational
// state, d<k|U|k>/dxi_i = i (s(i+1) - s(i)) where s(i) = chi(i) N psi(i).
MemberResult evaluate_member(const ControlSystem& sys, const std::vector<double>& phases,
                             double tau, bool want_gradient, bool want_tr, int substeps) {
  const int n_seg = static_cast<int>(phases.size());
  const int d = sys.basis.dim();
  const double dt = tau / n_seg;
  const MatrixXcd h = sys.h_eff();
  const Eigen::VectorXd charge =
      Eigen::Map<const Eigen::VectorXd>(sys.basis.phase_charge.data(), d);

  const MatrixXcd u0 = propagator_exp(h, dt);
  std::vector<MatrixXcd> seg(n_seg);
  for (int i = 0; i < n_seg; ++i) seg[i] = rotate(u0, charge, phases[i]);

  int idx[4];
  for (int k = 0; k < 4; ++k) {
    idx[k] = sys.basis.index_of(kComputational[k]);
    if (idx[k] < 0) throw Error(ErrorCode::InvalidArgument, "system lacks computational states");
  }

  // Forward kets per computational state.
  std::vector<std::vector<VectorXcd>> psi(4, std::vector<VectorXcd>(n_seg + 1));
  for (int k = 0; k < 4; ++k) {
    psi[k][0] = VectorXcd::Unit(d, idx[k]);
    for (int i = 0; i < n_seg; ++i) psi[k][i + 1] = seg[i] * psi[k][i];
  }
  ComputationalDiagonal diag{psi[0][n_seg](idx[0]), psi[1][n_seg](idx[1]),
                             psi[2][n_seg](idx[2]), psi[3][n_seg](idx[3])};
  const CzFidelity best = cz_fidelity(diag);
  MemberResult out;
  out.fidelity = best.fidelity;

  if (want_gradient) {
    // Envelope theorem: the optimal phi is stationary, so only dU enters.
    const FidelityAtPhase at = cz_fidelity_at(diag, best.phi);
    const std::complex<double> g[4] = {at.g00, at.g01, at.g10, at.g11};
    out.grad_f.assign(n_seg, 0.0);
    for (int k = 0; k < 4; ++k) {
      // chi stored as a column vector holding the bra's components.
      VectorXcd chi = VectorXcd::Unit(d, idx[k]);
      auto s_of = [&](const VectorXcd& bra, const VectorXcd& ket) {
        std::complex<double> acc{};
        for (int j = 0; j < d; ++j) acc += bra(j) * charge(j) * ket(j);
        return acc;
      };
      std::complex<double> s_next = s_of(chi, psi[k][n_seg]);
      for (int i = n_seg - 1; i >= 0; --i) {
        chi = (chi.transpose() * seg[i]).transpose();
        const std::complex<double> s_here = s_of(chi, psi[k][i]);
        const std::complex<double> du = std::complex<double>(0.0, 1.0) * (s_next - s_here);
        out.grad_f[i] += std::real(std::conj(g[k]) * du);
        s_next = s_here;
      }
    }
  }

  if (want_tr) {
    const int m = substeps;
    const double hs = dt / m;
    const MatrixXcd w0 = propagator_exp(h, hs);
    std::vector<MatrixXcd> wseg(n_seg);
    for (int i = 0; i < n_seg; ++i) wseg[i] = rotate(w0, charge, phases[i]);
    Eigen::VectorXd p(d);
    for (int j = 0; j < d; ++j) p(j) = sys.basis.rydberg_count[j];
    const int steps = n_seg * m;
    auto weight = [&](int s) { return (s == 0 || s == steps) ? 0.5 * hs : hs; };

    if (want_gradient) out.grad_t.assign(n_seg, 0.0);
    std::vector<VectorXcd> states(steps + 1);
    for (int k = 1; k < 4; ++k) {
      states[0] = VectorXcd::Unit(d, idx[k]);
      double t = weight(0) * (states[0].cwiseAbs2().dot(p));
      for (int s = 1; s <= steps; ++s) {
        states[s] = wseg[(s - 1) / m] * states[s - 1];
        t += weight(s) * states[s].cwiseAbs2().dot(p);
      }
      out.t_r += t / 4.0;
      if (!want_gradient) continue;

      // Adjoint of T = sum_s w_s psi_s^dag P psi_s.
      VectorXcd lambda = weight(steps) * p.cwiseProduct(states[steps]);
      for (int s = steps; s >= 1; --s) {
        const int i = (s - 1) / m;
        const VectorXcd mu = wseg[i].adjoint() * lambda;
        std::complex<double> a{}, b{};
        for (int j = 0; j < d; ++j) {
          a += std::conj(lambda(j)) * charge(j) * states[s](j);
          b += std::conj(mu(j)) * charge(j) * states[s - 1](j);
        }
        const std::complex<double> dterm = std::complex<double>(0.0, 1.0) * (a - b);
        out.grad_t[i] += 2.0 * std::real(dterm) / 4.0;
        lambda = weight(s - 1) * p.cwiseProduct(states[s - 1]) + mu;
      }
    }
  }
  return out;
}

std::vector<double> uniform_phases(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-kPi, kPi);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = dist(gen);
  return x;
}

}  // namespace

ControlProblem ControlProblem::single(ControlSystem system, int n_segments, double tau) {
  ControlProblem p;
  p.systems.push_back(std::move(system));
  p.weights = {1.0};
  p.n_segments = n_segments;
  p.tau = tau;
  return p;
}

void ControlProblem::validate() const {
  if (n_segments < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 segments", "n_segments");
  if (!(std::isfinite(tau) && tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive", "tau");
  if (systems.empty() || systems.size() != weights.size()) {
    throw Error(ErrorCode::InvalidArgument, "one weight per system required");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "weights must sum to 1");
  for (const auto& s : systems) {
    if (s.basis.labels != systems.front().basis.labels) {
      throw Error(ErrorCode::DimensionMismatch, "ensemble members use different bases");
    }
  }
  if (cost == CostKind::FidelityMinusTrPenalty && (!(tr_penalty >= 0.0) || substeps < 1)) {
    throw Error(ErrorCode::InvalidArgument, "invalid Rydberg-time penalty settings");
  }
}

ControlProblem ControlProblem::with_tau(double new_tau) const {
  ControlProblem p = *this;
  p.tau = new_tau;
  return p;
}

CostEvaluation evaluate_cost(const ControlProblem& problem, const std::vector<double>& phases,
                             bool want_gradient) {
  problem.validate();
  if (static_cast<int>(phases.size()) != problem.n_segments) {
    throw Error(ErrorCode::DimensionMismatch, "waveform length differs from the problem's N");
  }
  const bool penalized = problem.cost == CostKind::FidelityMinusTrPenalty;
  CostEvaluation out;
  if (want_gradient) out.gradient.assign(phases.size(), 0.0);
  for (std::size_t m = 0; m < problem.systems.size(); ++m) {
    const double w = problem.weights[m];
    const MemberResult r = evaluate_member(problem.systems[m], phases, problem.tau, want_gradient,
                                           penalized, problem.substeps);
    out.fidelity += w * r.fidelity;
    out.t_r += w * r.t_r;
    if (want_gradient) {
      for (std::size_t i = 0; i < phases.size(); ++i) {
        out.gradient[i] += w * r.grad_f[i];
        if (penalized) out.gradient[i] -= w * problem.tr_penalty * r.grad_t[i];
      }
    }
  }
  out.objective = out.fidelity - (penalized ? problem.tr_penalty * out.t_r : 0.0);
  return out;
}

double problem_fidelity(const ControlProblem& problem, const PhaseWaveform& wf) {
  ControlProblem p = problem.with_tau(wf.tau);
  p.cost = CostKind::Fidelity;
  return evaluate_cost(p, wf.phases, false).fidelity;
}

std::vector<double> fidelity_gradient(const ControlProblem& problem, const PhaseWaveform& wf) {
  ControlProblem p = problem.with_tau(wf.tau);
  p.cost = CostKind::Fidelity;
  return evaluate_cost(p, wf.phases, true).gradient;
}

OptimizeResult optimize_waveform(const ControlProblem& problem, const PhaseWaveform& init,
                                 const OptimizeOptions& opts) {
  problem.validate();
  if (opts.restarts < 1 || opts.max_iterations < 1 || !(opts.epsilon_f > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "optimizer options must be positive");
  }
  const int n = problem.n_segments;
  const PhaseWaveform start = init.n_segments() == n ? init : init.resampled(n);

  const CostWithGradient cost = [&](const std::vector<double>& x, std::vector<double>* grad) {
    const CostEvaluation e = evaluate_cost(problem, x, grad != nullptr);
    if (grad) {
      for (int i = 0; i < n; ++i) (*grad)[i] = -e.gradient[i];
    }
    return 1.0 - e.objective;
  };

  LbfgsOptions lo;
  lo.max_iterations = opts.max_iterations;
  lo.gradient_tolerance = opts.gradient_tolerance;
  if (problem.cost == CostKind::Fidelity) lo.stop_cost = opts.epsilon_f * opts.stop_fraction;

  OptimizeResult out;
  std::vector<double> best_x;
  double best_objective = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> x0 = r == 0 ? start.phases : uniform_phases(n, derive_seed(opts.seed, r));
    const LbfgsResult res = lbfgs_minimize(cost, std::move(x0), lo);
    for (double c : res.iteration_costs) {
      best_objective = std::max(best_objective, 1.0 - c);
      out.trace.push_back(best_objective);
    }
    const double run_objective = 1.0 - res.cost;
    out.run_objectives.push_back(run_objective);
    out.iterations += res.iterations;
    if (best_x.empty() || run_objective > out.objective) {
      out.objective = run_objective;
      best_x = res.x;
    }
    best_objective = std::max(best_objective, out.objective);
    if (problem.cost == CostKind::Fidelity && out.objective >= 1.0 - opts.epsilon_f) break;
  }

  for (auto& x : best_x) x = wrap_phase(x);
  out.waveform = PhaseWaveform(best_x, problem.tau);
  const CostEvaluation final_eval = evaluate_cost(problem, best_x, false);
  out.fidelity = final_eval.fidelity;
  out.objective = final_eval.objective;
  out.converged = out.fidelity >= 1.0 - opts.epsilon_f;
  return out;
}

QslResult qsl_search(const ProblemFamily& family, const QslOptions& qsl,
                     const OptimizeOptions& opts, const std::optional<PhaseWaveform>& init) {
  if (!(qsl.tau_lo > 0.0 && qsl.tau_hi > qsl.tau_lo)) {
    throw Error(ErrorCode::InvalidArgument, "QSL bounds must satisfy 0 < tau_lo < tau_hi");
  }
  if (!(qsl.epsilon > 0.0 && qsl.rel_tol > 0.0 && qsl.extension_factor > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid QSL options");
  }

  struct Probe {
    double fidelity;
    bool reached;
    PhaseWaveform wf;
  };
  std::map<double, Probe> probes;
  std::uint64_t probe_count = 0;

  auto run_probe = [&](double tau) -> const Probe& {
    if (auto it = probes.find(tau); it != probes.end()) return it->second;
    ControlProblem problem = family(tau);
    const int n = problem.n_segments;
    // Nearest converged waveform in tau, else the caller's initial guess.
    const PhaseWaveform* warm = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& [t, p] : probes) {
      if (p.reached && std::abs(t - tau) < best_dist) {
        best_dist = std::abs(t - tau);
        warm = &p.wf;
      }
    }
    PhaseWaveform start = warm ? warm->resampled(n).with_tau(tau)
                         : init ? init->resampled(n).with_tau(tau)
                                : PhaseWaveform::constant(n, tau);
    OptimizeOptions o = opts;
    o.epsilon_f = qsl.epsilon;
    o.seed = derive_seed(opts.seed, probe_count++);
    const OptimizeResult r = optimize_waveform(problem, start, o);
    return probes.emplace(tau, Probe{r.fidelity, r.converged, r.waveform}).first->second;
  };

  double hi = qsl.tau_hi;
  int ext = 0;
  while (!run_probe(hi).reached) {
    if (++ext > qsl.max_extensions) {
      throw Error(ErrorCode::BracketFailed,
                  "no gate time up to " + std::to_string(hi) + " reaches the fidelity target");
    }
    hi *= qsl.extension_factor;
  }
  double lo = std::min(qsl.tau_lo, hi / qsl.extension_factor);
  ext = 0;
  while (run_probe(lo).reached) {
    hi = lo;
    if (++ext > qsl.max_extensions) {
      throw Error(ErrorCode::BracketFailed,
                  "fidelity target reached down to tau=" + std::to_string(lo) +
                      "; lower the bracket");
    }
    lo /= qsl.extension_factor;
  }
  while (hi - lo >= qsl.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (run_probe(mid).reached) hi = mid; else lo = mid;
  }

  QslResult out;
  out.tau_star = hi;
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  const Probe& best = probes.at(hi);
  out.fidelity = best.fidelity;
  out.waveform = best.wf;
  for (const auto& [t, p] : probes) out.probes.push_back({t, p.fidelity, p.reached});
  return out;
}

}  // namespace spinflip
