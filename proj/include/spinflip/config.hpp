#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spinflip/dressed_model.hpp"
#include "spinflip/grape.hpp"
#include "spinflip/robust.hpp"
#include "spinflip/sweep_grid.hpp"

namespace spinflip {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

enum class Command { Dress, Optimize, Qsl, SweepDetuning, SweepSurface, SweepOptical, Robust, Scan };
std::string to_string(Command c);
Command command_from_string(const std::string& name);

/// Physical parameters in user units: MHz (ordinary frequency) and 1/us.
struct PhysicsConfig {
  double omega_L_mhz = 10.0;
  double delta_L_mhz = -5.9;
  double omega_mw_mhz = 1.0;
  double delta_mw_mhz = 0.0;
  std::optional<double> v_rr_mhz;  ///< empty = infinite blockade
  double gamma_r_per_us = 1.0 / 150.0;
  std::string branch = "auto";  ///< "lower", "upper" or "auto" (adiabatic in Delta_L)

  DressingParams to_params() const;
};

struct WaveformConfig {
  int n_segments = 40;
  std::optional<double> tau_us;
  std::optional<double> tau_cycles;  ///< in units of 2 pi / Omega_mw
  std::string file;                  ///< optional initial / scanned waveform

  /// tau_us if given, else tau_cycles * 2 pi / Omega_mw, else 1.3 cycles.
  double resolved_tau(double omega_mw) const;
};

struct QslConfig {
  double epsilon = 1e-4;
  double tau_lo_cycles = 0.6;
  double tau_hi_cycles = 2.0;
  double rel_tol = 0.01;
  int max_extensions = 6;
};

struct RobustConfig {
  EnsembleSpec ensemble = EnsembleSpec::common_omega_default();
  double tau_factor = 2.0;
  SweepAxis omega_grid{"omega_factor", 0.96, 1.04, 33, AxisScale::Linear};
  SweepAxis delta_grid_mhz{"delta_offset_mhz", -1.0, 1.0, 41, AxisScale::Linear};
};

struct SweepConfig {
  SweepAxis delta_L_mhz{"delta_L_mhz", -12.0, 0.0, 25, AxisScale::Linear};
  SweepAxis omega_ratio{"omega_ratio", 1.0, 100.0, 8, AxisScale::Log};
  SweepAxis delta_over_omega_L{"delta_over_omega_L", -3.0, 0.0, 8, AxisScale::Linear};
  SweepAxis vrr_over_omega_L{"vrr_over_omega_L", 0.1, 100.0, 15, AxisScale::Log};
};

struct ScanConfig {
  ScanAxis axis = ScanAxis::OmegaLCommon;
  SweepAxis grid{"grid", 0.96, 1.04, 33, AxisScale::Linear};
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Command command = Command::Dress;
  std::uint64_t seed = 1;
  PhysicsConfig physics;
  WaveformConfig waveform;
  OptimizeOptions optimizer;
  QslConfig qsl;
  RobustConfig robust;
  SweepConfig sweep;
  ScanConfig scan;
};

/// Parses a JSON document. Unknown keys and invalid values raise
/// CONFIG_INVALID with the dotted field path in the message.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
/// Fully resolved configuration (every default spelled out) as JSON text.
std::string config_to_json(const RunConfig& config, int indent = 2);
/// Checks value ranges; throws CONFIG_INVALID naming the field.
void validate_config(const RunConfig& config);

}  // namespace spinflip
