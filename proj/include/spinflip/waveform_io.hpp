#pragma once

#include <filesystem>
#include <iosfwd>

#include "spinflip/propagator.hpp"

namespace spinflip {

// Text format:
//   N=<int>
//   tau_us=<float>
//   one phase in radians per line, wrapped to [-pi, pi)
// Numbers are written with 17 significant digits so a write/read cycle is
// bit-identical.
void write_waveform(std::ostream& out, const PhaseWaveform& wf);
PhaseWaveform read_waveform(std::istream& in);

void save_waveform(const std::filesystem::path& path, const PhaseWaveform& wf);
PhaseWaveform load_waveform(const std::filesystem::path& path);

}  // namespace spinflip
