#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinflip/dressed_model.hpp"
#include "spinflip/hamiltonian.hpp"

namespace spinflip {

/// A phase-controlled two-atom system. The Hamiltonian at control phase xi is
/// R(xi) h0 R(xi)^dagger - i (gamma_r/2) N_r, R(xi) = exp(i xi diag(phase_charge)),
/// so a single matrix exponential per segment duration serves every phase.
struct ControlSystem {
  Basis basis;
  Eigen::MatrixXcd h0;  ///< coherent Hamiltonian at xi = 0
  double gamma_r = 0.0;

  Eigen::MatrixXcd h_eff() const;
  /// Full H_eff(xi), mainly for checks.
  Eigen::MatrixXcd hamiltonian(double xi) const;
  bool has_decay() const { return gamma_r > 0.0; }
  ControlSystem with_decay(double gamma) const;
};

/// Microwave phase control of identical atoms; decay from params.gamma_r.
ControlSystem microwave_system(const DressingParams& params);
/// Atoms with distinct parameters sharing the microwave frame energy delta_a.
ControlSystem microwave_system(const DressingParams& atom1, const DressingParams& atom2,
                               double delta_a, double gamma_r);
/// Optical laser-phase control on {|0>, |1>, |r>}^2.
ControlSystem optical_system(double omega_L, double delta_L, Interaction v_rr,
                             double gamma_r = 0.0);

struct PhaseWaveform {
  std::vector<double> phases;
  double tau = 0.0;

  PhaseWaveform() = default;
  PhaseWaveform(std::vector<double> phases_, double tau_) : phases(std::move(phases_)), tau(tau_) {}
  static PhaseWaveform constant(int n, double tau, double xi = 0.0);

  int n_segments() const { return static_cast<int>(phases.size()); }
  double segment_duration() const { return tau / n_segments(); }
  /// Throws INVALID_ARGUMENT unless N >= 1 and tau > 0 is finite.
  void validate() const;
  /// Linear interpolation of the phase array at the new segment midpoints.
  PhaseWaveform resampled(int n) const;
  /// Same phases over a different duration.
  PhaseWaveform with_tau(double new_tau) const;
};

struct Trajectory {
  std::string label;
  std::vector<double> times;
  Eigen::MatrixXd populations;  ///< rows: time samples, columns: basis states
  std::vector<double> rydberg_population;
  std::vector<double> norm;
};

struct GateRecord {
  Basis basis;
  double gamma_r = 0.0;
  Eigen::MatrixXcd u_total;
  std::vector<Eigen::MatrixXcd> u_segments;
  std::vector<Trajectory> trajectories;
  std::vector<double> norms;  ///< final norm per trajectory
  double t_r = 0.0;           ///< set when trajectories for 01, 10, 11 exist
  int substeps = 0;

  const Trajectory* find_trajectory(const std::string& label) const;
};

struct PropagateOptions {
  int substeps = 32;  ///< trajectory samples per segment
  bool keep_segments = true;
  bool record_trajectories = true;
};

/// Propagates computational basis states given by label.
GateRecord propagate(const ControlSystem& system, const PhaseWaveform& wf,
                     const std::vector<std::string>& initial_labels = {"01", "10", "11"},
                     const PropagateOptions& opts = {});

/// Propagates arbitrary initial vectors; labels are used for the trajectory
/// names. Throws DIMENSION_MISMATCH if a vector does not match the basis.
GateRecord propagate(const ControlSystem& system, const PhaseWaveform& wf,
                     const std::vector<Eigen::VectorXcd>& initial_states,
                     const std::vector<std::string>& labels, const PropagateOptions& opts = {});

/// (T_01 + T_10 + T_11) / 4 by trapezoid quadrature of the recorded Rydberg
/// occupancy. Throws MISSING_TRAJECTORY if one of the three is absent.
double rydberg_time(const GateRecord& record);

struct RydbergTimeEstimate {
  double t_r = 0.0;
  int substeps = 0;
};
/// Doubles the sub-step count from `start` until T_r changes by less than
/// `rel_tol` (relative), capped at 16 doublings.
RydbergTimeEstimate converged_rydberg_time(const ControlSystem& system, const PhaseWaveform& wf,
                                           int start = 32, double rel_tol = 1e-4);

}  // namespace spinflip
