#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spinflip {

/// Numeric result table with a per-row status ("ok" or an error code).
/// The first `key_columns` columns identify a row (the sweep coordinates).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> status;
  int key_columns = 1;

  void add_row(std::vector<double> values, std::string row_status = "ok");
  std::size_t size() const { return rows.size(); }
  /// Index of a column, throws INVALID_ARGUMENT if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

/// CSV layout:
///   # params: <one-line JSON>
///   # keys: <key column count>
///   col1,col2,...,status
///   rows, NaN written as "nan"
void write_table_csv(std::ostream& out, const Table& table, const std::string& params_json);

struct CsvDocument {
  std::string params_json;
  Table table;
};
/// Inverse of write_table_csv. Throws IO_ERROR on malformed input.
CsvDocument read_table_csv(std::istream& in);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

}  // namespace spinflip
