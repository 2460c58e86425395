#include "spinflip/export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "spinflip/errors.hpp"

namespace spinflip {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Orders keys numerically with NaN last so the merged table has one
// well-defined order.
struct KeyLess {
  bool operator()(const std::vector<double>& a, const std::vector<double>& b) const {
    for (std::size_t k = 0; k < a.size(); ++k) {
      const bool na = std::isnan(a[k]), nb = std::isnan(b[k]);
      if (na != nb) return nb;
      if (!na && a[k] != b[k]) return a[k] < b[k];
    }
    return false;
  }
};

}  // namespace

ExportFormat export_format_from_string(const std::string& name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  throw Error(ErrorCode::ConfigInvalid, "unknown export format '" + name + "'", "format");
}

Table merge_results(const fs::path& dir, std::string* params_json) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir.string(), "dir");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "results.csv") files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorCode::Io, "no results.csv below " + dir.string(), "dir");
  std::sort(files.begin(), files.end());

  Table merged;
  std::vector<std::string> params;
  std::map<std::vector<double>, std::pair<std::vector<double>, std::string>, KeyLess> rows;
  for (std::size_t f = 0; f < files.size(); ++f) {
    std::ifstream in(files[f]);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + files[f].string(), "dir");
    CsvDocument doc = read_table_csv(in);
    if (f == 0) {
      merged.columns = doc.table.columns;
      merged.key_columns = doc.table.key_columns;
    } else if (doc.table.columns != merged.columns || doc.table.key_columns != merged.key_columns) {
      throw Error(ErrorCode::MixedSchemas,
                  files[f].string() + " has different columns than " + files[0].string(), "dir");
    }
    if (std::find(params.begin(), params.end(), doc.params_json) == params.end()) {
      params.push_back(doc.params_json);
    }
    for (std::size_t r = 0; r < doc.table.size(); ++r) {
      const auto& values = doc.table.rows[r];
      std::vector<double> key(values.begin(), values.begin() + merged.key_columns);
      rows.emplace(std::move(key), std::make_pair(values, doc.table.status[r]));
    }
  }
  for (auto& [key, row] : rows) merged.add_row(row.first, row.second);

  if (params_json) {
    if (params.size() == 1) {
      *params_json = params.front();
    } else {
      json all = json::array();
      for (const auto& p : params) {
        try {
          all.push_back(json::parse(p));
        } catch (const json::parse_error&) {
          all.push_back(p);
        }
      }
      *params_json = all.dump();
    }
  }
  return merged;
}

fs::path export_results(const fs::path& dir, ExportFormat format) {
  std::string params;
  const Table t = merge_results(dir, &params);
  std::ostringstream ss;
  fs::path target;
  if (format == ExportFormat::Csv) {
    target = dir / "export.csv";
    write_table_csv(ss, t, params);
  } else {
    target = dir / "export.json";
    json rows = json::array();
    for (std::size_t r = 0; r < t.size(); ++r) {
      json row = json::object();
      for (std::size_t k = 0; k < t.columns.size(); ++k) {
        const double x = t.rows[r][k];
        row[t.columns[k]] = std::isfinite(x) ? json(x) : json(nullptr);
      }
      row["status"] = t.status[r];
      rows.push_back(row);
    }
    json doc;
    try {
      doc["params"] = json::parse(params);
    } catch (const json::parse_error&) {
      doc["params"] = params;
    }
    doc["columns"] = t.columns;
    doc["key_columns"] = t.key_columns;
    doc["rows"] = rows;
    ss << doc.dump(2) << "\n";
  }
  std::ofstream out(target, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + target.string(), "dir");
  out << ss.str();
  return target;
}

}  // namespace spinflip
