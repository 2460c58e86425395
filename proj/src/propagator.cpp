#include "spinflip/propagator.hpp"

#include <cmath>

#include "spinflip/errors.hpp"
#include "spinflip/linalg.hpp"

namespace spinflip {

namespace {

// R(xi) U R(xi)^dagger for diagonal R = exp(i xi n).
Eigen::MatrixXcd rotate(const Eigen::MatrixXcd& u, const std::vector<double>& n, double xi) {
  const int d = static_cast<int>(n.size());
  Eigen::VectorXcd phase(d);
  for (int j = 0; j < d; ++j) phase(j) = std::polar(1.0, xi * n[j]);
  Eigen::MatrixXcd out(d, d);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) out(j, k) = phase(j) * u(j, k) * std::conj(phase(k));
  }
  return out;
}

ControlSystem from_operator(const OperatorMatrix& h, double gamma_r) {
  if (!(gamma_r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma_r must be non-negative");
  ControlSystem s;
  s.basis = h.basis;
  s.h0 = h.matrix;
  s.gamma_r = gamma_r;
  return s;
}

double trapezoid(const std::vector<double>& y, double h) {
  if (y.size() < 2) return 0.0;
  double acc = 0.5 * (y.front() + y.back());
  for (std::size_t k = 1; k + 1 < y.size(); ++k) acc += y[k];
  return acc * h;
}

}  // namespace

Eigen::MatrixXcd ControlSystem::h_eff() const {
  OperatorMatrix op{basis, h0, true};
  return apply_decay(op, gamma_r).matrix;
}

Eigen::MatrixXcd ControlSystem::hamiltonian(double xi) const {
  return rotate(h_eff(), basis.phase_charge, xi);
}

ControlSystem ControlSystem::with_decay(double gamma) const {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma_r must be non-negative");
  ControlSystem s = *this;
  s.gamma_r = gamma;
  return s;
}

ControlSystem microwave_system(const DressingParams& params) {
  return from_operator(two_atom_hamiltonian(params, 0.0), params.gamma_r);
}

ControlSystem microwave_system(const DressingParams& atom1, const DressingParams& atom2,
                               double delta_a, double gamma_r) {
  return from_operator(two_atom_hamiltonian(atom1, atom2, 0.0, delta_a), gamma_r);
}

ControlSystem optical_system(double omega_L, double delta_L, Interaction v_rr, double gamma_r) {
  return from_operator(optical_two_atom_hamiltonian(omega_L, delta_L, v_rr, 0.0), gamma_r);
}

PhaseWaveform PhaseWaveform::constant(int n, double tau, double xi) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "waveform needs at least one segment");
  return PhaseWaveform(std::vector<double>(static_cast<std::size_t>(n), xi), tau);
}

void PhaseWaveform::validate() const {
  if (phases.empty()) throw Error(ErrorCode::InvalidArgument, "waveform has no segments");
  if (!(std::isfinite(tau) && tau > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "waveform duration must be positive", "tau");
  }
  for (double p : phases) {
    if (!std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "non-finite phase");
  }
}

PhaseWaveform PhaseWaveform::resampled(int n) const {
  validate();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "waveform needs at least one segment");
  const int m = n_segments();
  if (n == m) return *this;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    // Midpoint of new segment k in units of old segments, measured from the
    // first old midpoint.
    const double x = (k + 0.5) * m / n - 0.5;
    if (x <= 0.0) {
      out[k] = phases.front();
    } else if (x >= m - 1) {
      out[k] = phases.back();
    } else {
      const int i = static_cast<int>(std::floor(x));
      const double f = x - i;
      out[k] = (1.0 - f) * phases[i] + f * phases[i + 1];
    }
  }
  return PhaseWaveform(std::move(out), tau);
}

PhaseWaveform PhaseWaveform::with_tau(double new_tau) const {
  PhaseWaveform out(phases, new_tau);
  out.validate();
  return out;
}

const Trajectory* GateRecord::find_trajectory(const std::string& label) const {
  for (const auto& t : trajectories) {
    if (t.label == label) return &t;
  }
  return nullptr;
}

GateRecord propagate(const ControlSystem& system, const PhaseWaveform& wf,
                     const std::vector<std::string>& initial_labels,
                     const PropagateOptions& opts) {
  std::vector<Eigen::VectorXcd> states;
  states.reserve(initial_labels.size());
  for (const auto& label : initial_labels) states.push_back(basis_vector(system.basis, label));
  return propagate(system, wf, states, initial_labels, opts);
}

GateRecord propagate(const ControlSystem& system, const PhaseWaveform& wf,
                     const std::vector<Eigen::VectorXcd>& initial_states,
                     const std::vector<std::string>& labels, const PropagateOptions& opts) {
  wf.validate();
  const int d = system.basis.dim();
  if (system.h0.rows() != d || system.h0.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "Hamiltonian does not match its basis");
  }
  if (labels.size() != initial_states.size()) {
    throw Error(ErrorCode::InvalidArgument, "one label per initial state required");
  }
  for (const auto& s : initial_states) {
    if (s.size() != d) {
      throw Error(ErrorCode::DimensionMismatch,
                  "initial state of dimension " + std::to_string(s.size()) +
                      " does not match basis dimension " + std::to_string(d));
    }
  }
  if (opts.record_trajectories && opts.substeps < 1) {
    throw Error(ErrorCode::InvalidArgument, "substeps must be positive");
  }

  const Eigen::MatrixXcd h = system.h_eff();
  const double dt = wf.segment_duration();
  const Eigen::MatrixXcd u0 = propagator_exp(h, dt);
  const auto& charge = system.basis.phase_charge;

  GateRecord rec;
  rec.basis = system.basis;
  rec.gamma_r = system.gamma_r;
  rec.u_total = Eigen::MatrixXcd::Identity(d, d);
  for (double xi : wf.phases) {
    Eigen::MatrixXcd u = rotate(u0, charge, xi);
    rec.u_total = u * rec.u_total;
    if (opts.keep_segments) rec.u_segments.push_back(std::move(u));
  }

  if (!opts.record_trajectories) {
    for (const auto& s : initial_states) rec.norms.push_back((rec.u_total * s).norm());
    return rec;
  }

  const int m = opts.substeps;
  rec.substeps = m;
  const double h_sub = dt / m;
  const Eigen::MatrixXcd w0 = propagator_exp(h, h_sub);
  std::vector<Eigen::MatrixXcd> w_seg;
  w_seg.reserve(wf.phases.size());
  for (double xi : wf.phases) w_seg.push_back(rotate(w0, charge, xi));

  const int samples = wf.n_segments() * m + 1;
  for (std::size_t s = 0; s < initial_states.size(); ++s) {
    Trajectory tr;
    tr.label = labels[s];
    tr.times.resize(samples);
    tr.populations.resize(samples, d);
    tr.rydberg_population.resize(samples);
    tr.norm.resize(samples);
    Eigen::VectorXcd psi = initial_states[s];
    auto record = [&](int k) {
      tr.times[k] = k * h_sub;
      double ryd = 0.0;
      for (int j = 0; j < d; ++j) {
        const double p = std::norm(psi(j));
        tr.populations(k, j) = p;
        ryd += system.basis.rydberg_count[j] * p;
      }
      tr.rydberg_population[k] = ryd;
      tr.norm[k] = psi.norm();
    };
    record(0);
    int k = 0;
    for (int seg = 0; seg < wf.n_segments(); ++seg) {
      for (int sub = 0; sub < m; ++sub) {
        psi = w_seg[seg] * psi;
        record(++k);
      }
    }
    rec.norms.push_back(psi.norm());
    rec.trajectories.push_back(std::move(tr));
  }
  if (rec.find_trajectory("01") && rec.find_trajectory("10") && rec.find_trajectory("11")) {
    rec.t_r = rydberg_time(rec);
  }
  return rec;
}

double rydberg_time(const GateRecord& record) {
  double total = 0.0;
  for (const char* label : {"01", "10", "11"}) {
    const Trajectory* tr = record.find_trajectory(label);
    if (!tr) {
      throw Error(ErrorCode::MissingTrajectory,
                  std::string("no trajectory recorded for |") + label + ">");
    }
    const double h = tr->times.size() > 1 ? tr->times[1] - tr->times[0] : 0.0;
    total += trapezoid(tr->rydberg_population, h);
  }
  return total / 4.0;
}

RydbergTimeEstimate converged_rydberg_time(const ControlSystem& system, const PhaseWaveform& wf,
                                           int start, double rel_tol) {
  PropagateOptions opts;
  opts.keep_segments = false;
  opts.substeps = start;
  double prev = propagate(system, wf, {"01", "10", "11"}, opts).t_r;
  for (int doubling = 0; doubling < 16; ++doubling) {
    opts.substeps *= 2;
    const double next = propagate(system, wf, {"01", "10", "11"}, opts).t_r;
    if (std::abs(next - prev) <= rel_tol * std::abs(next)) return {next, opts.substeps};
    prev = next;
  }
  throw Error(ErrorCode::NoConvergence, "Rydberg time did not converge under sub-step refinement");
}

}  // namespace spinflip
