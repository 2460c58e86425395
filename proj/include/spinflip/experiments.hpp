#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spinflip/grape.hpp"
#include "spinflip/robust.hpp"
#include "spinflip/table.hpp"

namespace spinflip {

/// Result of one grid point, as stored in a checkpoint.
struct PointResult {
  std::vector<double> values;
  std::string status = "ok";
  std::optional<PhaseWaveform> waveform;
};

/// Per-point checkpoints under a directory: <dir>/<index>.json. A point is
/// only reused when its stored fingerprint matches, so a changed
/// configuration never picks up stale results.
class PointStore {
 public:
  PointStore(std::filesystem::path dir, std::string fingerprint);

  std::optional<PointResult> load(std::size_t index) const;
  void save(std::size_t index, const PointResult& result) const;

 private:
  std::filesystem::path path_for(std::size_t index) const;
  std::filesystem::path dir_;
  std::string fingerprint_;
};

struct ExperimentSettings {
  int n_segments = 40;
  OptimizeOptions optimizer;
  /// QSL threshold and tolerances; the tau bracket is set per point from
  /// tau_lo_cycles / tau_hi_cycles.
  QslOptions qsl;
  /// Initial QSL bracket in cycles of the driving Rabi frequency
  /// (2 pi / Omega_mw, or 2 pi / Omega_L for the optical gate).
  double tau_lo_cycles = 0.6;
  double tau_hi_cycles = 2.0;
  int workers = 1;
  std::uint64_t seed = 1;
  const PointStore* store = nullptr;
  /// Called after each finished point with (done, total); may be empty.
  std::function<void(std::size_t, std::size_t)> progress;
};

struct ExperimentOutput {
  Table table;
  std::vector<std::optional<PhaseWaveform>> waveforms;  ///< one per row
};

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be
/// written to slot i by fn; the first exception is rethrown after all
/// workers stop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// Dressed quantities, QSL gate time, Rydberg time and decay-limited fidelity
/// per laser detuning (rad/us). Infinite blockade, branch adiabatic in Delta_L.
ExperimentOutput run_detuning_sweep(double omega_L, double omega_mw,
                                    const std::vector<double>& delta_grid, double gamma_r,
                                    const ExperimentSettings& settings);

/// QSL gate time and Rydberg time over (Omega_L / Omega_mw) x (Delta_L / Omega_L),
/// row-major with the detuning varying fastest, plus the asymptotic overlays.
ExperimentOutput run_qsl_surface(double omega_mw, const std::vector<double>& ratio_grid,
                                 const std::vector<double>& detuning_grid,
                                 const ExperimentSettings& settings);

/// Optical laser-phase gate with Omega_L = 1: QSL tau* Omega_L per V_rr / Omega_L.
ExperimentOutput run_optical_blockade_sweep(const std::vector<double>& vrr_over_omega,
                                            const ExperimentSettings& settings);

struct RobustComparison {
  double tau_optimal = 0.0;
  double tau_robust = 0.0;
  PhaseWaveform optimal;
  PhaseWaveform robust;
  double optimal_fidelity = 0.0;         ///< unitary, nominal parameters
  double robust_ensemble_fidelity = 0.0;
  double robust_nominal_fidelity = 0.0;  ///< unitary, nominal parameters
  /// Columns: axis value, then {optimal, robust} x {unitary, decay}, then
  /// T_r of both waveforms.
  Table omega_scan;
  Table delta_scan;
};

/// Non-robust QSL optimum, robust ensemble waveform at robust_tau_factor * tau*,
/// and sensitivity scans of both.
RobustComparison run_robust_comparison(const DressingParams& nominal, const EnsembleSpec& spec,
                                       const std::vector<double>& omega_factor_grid,
                                       const std::vector<double>& delta_offset_mhz_grid,
                                       double robust_tau_factor,
                                       const ExperimentSettings& settings);

}  // namespace spinflip
