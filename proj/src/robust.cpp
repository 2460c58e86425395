#include "spinflip/robust.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "spinflip/errors.hpp"
#include "spinflip/gate_metrics.hpp"
#include "spinflip/linalg.hpp"
#include "spinflip/units.hpp"

namespace spinflip {

EnsembleSpec EnsembleSpec::common_omega_default() {
  EnsembleSpec s;
  s.members = {{1.00, 1.00, 0.0, 0.0, 0.5}, {1.02, 1.02, 0.0, 0.0, 0.25}, {0.98, 0.98, 0.0, 0.0, 0.25}};
  return s;
}

EnsembleSpec EnsembleSpec::nominal_only() {
  EnsembleSpec s;
  s.members = {{}};
  return s;
}

void EnsembleSpec::validate() const {
  if (members.empty()) throw Error(ErrorCode::InvalidArgument, "ensemble has no members", "ensemble");
  double sum = 0.0;
  for (const auto& m : members) {
    if (!(m.weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "ensemble weights must be positive", "ensemble");
    if (!(m.omega_factor1 > 0.0 && m.omega_factor2 > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "Omega_L factors must be positive", "ensemble");
    }
    if (!std::isfinite(m.delta_offset1) || !std::isfinite(m.delta_offset2)) {
      throw Error(ErrorCode::InvalidArgument, "detuning offsets must be finite", "ensemble");
    }
    sum += m.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "ensemble weights must sum to 1", "ensemble");
  }
}

ControlSystem perturbed_system(const DressingParams& nominal, const EnsembleMember& member,
                               double gamma_r) {
  DressingParams a1 = nominal;
  DressingParams a2 = nominal;
  a1.omega_L *= member.omega_factor1;
  a2.omega_L *= member.omega_factor2;
  a1.delta_L += member.delta_offset1;
  a2.delta_L += member.delta_offset2;
  return microwave_system(a1, a2, microwave_frame_shift(nominal), gamma_r);
}

ControlProblem ensemble_problem(const EnsembleSpec& spec, const DressingParams& nominal,
                                int n_segments, double tau) {
  spec.validate();
  ControlProblem p;
  p.n_segments = n_segments;
  p.tau = tau;
  for (const auto& m : spec.members) {
    p.systems.push_back(perturbed_system(nominal, m, 0.0));
    p.weights.push_back(m.weight);
  }
  return p;
}

double ensemble_fidelity(const EnsembleSpec& spec, const DressingParams& nominal,
                         const PhaseWaveform& wf) {
  wf.validate();
  return problem_fidelity(ensemble_problem(spec, nominal, wf.n_segments(), wf.tau), wf);
}

RobustResult optimize_robust(const EnsembleSpec& spec, const DressingParams& nominal,
                             const PhaseWaveform& init, const OptimizeOptions& opts) {
  init.validate();
  const ControlProblem problem = ensemble_problem(spec, nominal, init.n_segments(), init.tau);
  RobustResult out;
  out.optimization = optimize_waveform(problem, init, opts);
  out.ensemble_fidelity = out.optimization.fidelity;
  return out;
}

std::string to_string(ScanAxis axis) {
  return axis == ScanAxis::OmegaLCommon ? "OMEGA_L_COMMON" : "DELTA_L1";
}

ScanAxis scan_axis_from_string(const std::string& name) {
  if (name == "OMEGA_L_COMMON") return ScanAxis::OmegaLCommon;
  if (name == "DELTA_L1") return ScanAxis::DeltaL1;
  throw Error(ErrorCode::ConfigInvalid, "unknown scan axis '" + name + "'", "axis");
}

SensitivityCurve sensitivity_scan(const PhaseWaveform& wf, const DressingParams& nominal,
                                  ScanAxis axis, const std::vector<double>& grid) {
  wf.validate();
  nominal.validate();
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty scan grid", "grid");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "scan grid must be strictly increasing", "grid");
    }
  }
  for (double g : grid) {
    const bool ok = axis == ScanAxis::OmegaLCommon
                        ? std::abs(g - 1.0) <= 0.1 + 1e-12
                        : std::abs(from_mhz(g)) <= 0.5 * nominal.omega_L * (1.0 + 1e-12);
    if (!ok) throw Error(ErrorCode::InvalidArgument, "scan grid leaves the supported range", "grid");
  }

  SensitivityCurve curve;
  curve.axis = axis;
  curve.grid = grid;
  PropagateOptions no_traj;
  no_traj.keep_segments = false;
  no_traj.record_trajectories = false;
  PropagateOptions with_traj;
  with_traj.keep_segments = false;
  for (double g : grid) {
    EnsembleMember m;
    if (axis == ScanAxis::OmegaLCommon) {
      m.omega_factor1 = m.omega_factor2 = g;
    } else {
      m.delta_offset1 = from_mhz(g);
    }
    const ControlSystem unitary = perturbed_system(nominal, m, 0.0);
    const GateRecord rec = propagate(unitary, wf, {"01", "10", "11"}, with_traj);
    const double fu = cz_fidelity(rec.basis, rec.u_total).fidelity;
    double fd = fu;
    if (nominal.gamma_r > 0.0) {
      const GateRecord lossy = propagate(unitary.with_decay(nominal.gamma_r), wf, {"01", "10", "11"}, no_traj);
      fd = decay_limited_fidelity(lossy, nominal.gamma_r, DecayMethod::NonHermitian);
    }
    curve.fidelity_unitary.push_back(fu);
    curve.fidelity_decay.push_back(fd);
    curve.t_r.push_back(rec.t_r);
  }
  return curve;
}

void write_sensitivity_csv(std::ostream& out, const SensitivityCurve& curve) {
  out << "axis_value,fidelity_unitary,fidelity_decay,t_r_us\n";
  char buf[160];
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.12g,%.15g,%.15g,%.12g\n", curve.grid[k],
                  curve.fidelity_unitary[k], curve.fidelity_decay[k], curve.t_r[k]);
    out << buf;
  }
}

double perturbed_entangling_energy(const MotionalParams& mp) {
  mp.validate();
  const double omega_bar = 0.5 * (mp.omega_L1 + mp.omega_L2);
  if (!(omega_bar > 0.0)) throw Error(ErrorCode::InvalidArgument, "laser Rabi frequencies vanish");

  const Branch branch = adiabatic_branch(mp.delta);
  DressingParams sym;
  sym.omega_L = omega_bar;
  sym.delta_L = mp.delta;
  sym.v_rr = mp.v_rr;
  sym.branch = branch;
  const DressedPair ref_pair = dress_pair(sym);

  const OperatorMatrix h = motional_hamiltonian(mp);
  const int n = h.basis.dim();
  Eigen::VectorXd reference = Eigen::VectorXd::Zero(n);
  reference(0) = ref_pair.alpha;
  reference(1) = ref_pair.beta;
  if (n == 4) reference(3) = ref_pair.gamma;
  const SelectedEigenpair sel = select_adiabatic_eigenpair(h.matrix.real(), reference);

  // Per-atom Rydberg energy -Delta + k p_i / m, with the atom-1 and atom-2
  // momenta chosen so that (e1 - e2)/2 reproduces the B-D coupling.
  const double doppler_com = mp.com_doppler();
  const double doppler_rel = mp.relative_coupling();
  auto one_atom_shift = [&](double omega, double delta) {
    const double split = std::hypot(omega, delta);
    return branch == Branch::Lower ? -0.5 * delta - 0.5 * split : -0.5 * delta + 0.5 * split;
  };
  const double e1 = one_atom_shift(mp.omega_L1, mp.delta - (doppler_com - doppler_rel));
  const double e2 = one_atom_shift(mp.omega_L2, mp.delta - (doppler_com + doppler_rel));
  return sel.value - e1 - e2;
}

std::vector<MomentumSample> sample_thermal_momenta(double sigma_p, int count, std::uint64_t seed) {
  if (!(sigma_p >= 0.0) || count < 0) {
    throw Error(ErrorCode::InvalidArgument, "momentum width and count must be non-negative");
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<MomentumSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double p1 = sigma_p * dist(gen);
    const double p2 = sigma_p * dist(gen);
    out.push_back({0.5 * (p1 - p2), p1 + p2});
  }
  return out;
}

}  // namespace spinflip
