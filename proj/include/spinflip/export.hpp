#pragma once

#include <filesystem>
#include <string>

#include "spinflip/table.hpp"

namespace spinflip {

enum class ExportFormat { Csv, Json };
ExportFormat export_format_from_string(const std::string& name);

/// Every results.csv below `dir` merged into one table. Rows are deduplicated
/// on the key columns (first file in path order wins) and sorted by key.
/// MIXED_SCHEMAS if two files disagree on columns; IO_ERROR if there are none.
Table merge_results(const std::filesystem::path& dir, std::string* params_json = nullptr);

/// Writes <dir>/export.csv or <dir>/export.json and returns its path.
std::filesystem::path export_results(const std::filesystem::path& dir, ExportFormat format);

}  // namespace spinflip
