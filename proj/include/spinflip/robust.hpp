#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spinflip/grape.hpp"
#include "spinflip/hamiltonian.hpp"

namespace spinflip {

/// One ensemble member: multiplicative factors on each atom's Omega_L and
/// additive offsets (rad/us) on each atom's Delta_L.
struct EnsembleMember {
  double omega_factor1 = 1.0;
  double omega_factor2 = 1.0;
  double delta_offset1 = 0.0;
  double delta_offset2 = 0.0;
  double weight = 1.0;
};

struct EnsembleSpec {
  std::vector<EnsembleMember> members;

  /// {(1.00, 1/2), (1.02, 1/4), (0.98, 1/4)} applied to both atoms' Omega_L.
  static EnsembleSpec common_omega_default();
  static EnsembleSpec nominal_only();
  /// Throws INVALID_ARGUMENT unless weights are positive and sum to 1 (1e-12)
  /// and factors are positive.
  void validate() const;
};

/// The two-atom system for perturbed atoms. The microwave stays tuned to the
/// nominal dressed resonance, so perturbations detune it.
ControlSystem perturbed_system(const DressingParams& nominal, const EnsembleMember& member,
                               double gamma_r);

/// Ensemble control problem, decay-free.
ControlProblem ensemble_problem(const EnsembleSpec& spec, const DressingParams& nominal,
                                int n_segments, double tau);

double ensemble_fidelity(const EnsembleSpec& spec, const DressingParams& nominal,
                         const PhaseWaveform& wf);

struct RobustResult {
  OptimizeResult optimization;
  double ensemble_fidelity = 0.0;
};

RobustResult optimize_robust(const EnsembleSpec& spec, const DressingParams& nominal,
                             const PhaseWaveform& init, const OptimizeOptions& opts);

enum class ScanAxis { OmegaLCommon, DeltaL1 };
std::string to_string(ScanAxis axis);
ScanAxis scan_axis_from_string(const std::string& name);

struct SensitivityCurve {
  ScanAxis axis = ScanAxis::OmegaLCommon;
  /// Omega_L factor for OMEGA_L_COMMON, atom-1 detuning offset in MHz for DELTA_L1.
  std::vector<double> grid;
  std::vector<double> fidelity_unitary;
  std::vector<double> fidelity_decay;  ///< with nominal.gamma_r (non-Hermitian)
  std::vector<double> t_r;
};

/// Re-propagates a fixed waveform over a strictly increasing grid. Throws
/// INVALID_ARGUMENT for non-monotone grids or grids outside +-10% (Omega) or
/// +-Omega_L/2 (detuning offset).
SensitivityCurve sensitivity_scan(const PhaseWaveform& wf, const DressingParams& nominal,
                                  ScanAxis axis, const std::vector<double>& grid);

/// CSV with columns axis_value, fidelity_unitary, fidelity_decay, t_r_us.
void write_sensitivity_csv(std::ostream& out, const SensitivityCurve& curve);

/// J' = E(dressed |gg>) - E1(atom 1) - E1(atom 2), where each atom's one-atom
/// light shift uses its own Rabi frequency and Doppler-shifted detuning.
double perturbed_entangling_energy(const MotionalParams& mp);

struct MomentumSample {
  double p_rel = 0.0;
  double p_com = 0.0;
};
/// Independent zero-mean Gaussian momenta for each atom, converted to relative
/// and centre-of-mass coordinates. No default width is provided.
std::vector<MomentumSample> sample_thermal_momenta(double sigma_p, int count, std::uint64_t seed);

}  // namespace spinflip
