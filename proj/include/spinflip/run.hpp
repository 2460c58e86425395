#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "spinflip/config.hpp"
#include "spinflip/errors.hpp"

namespace spinflip {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int workers = 1;
  /// Reuse per-point checkpoints whose fingerprint matches the config.
  bool resume = false;
  std::ostream* log = nullptr;  ///< human-readable progress, may be null
};

/// FNV-1a 64 of the resolved config JSON, as 16 hex digits.
std::string config_fingerprint(const RunConfig& config);

/// Executes the configured command and writes manifest.json, results.csv and
/// the command's other artifacts into out_dir. Throws Error on failure.
void run(const RunConfig& config, const RunOptions& options);

/// error.json: {"code", "message", "field"}.
void write_error_record(const std::filesystem::path& out_dir, const Error& error);

}  // namespace spinflip
