#include "spinflip/table.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "spinflip/errors.hpp"

namespace spinflip {

void Table::add_row(std::vector<double> values, std::string row_status) {
  if (values.size() != columns.size()) {
    throw Error(ErrorCode::DimensionMismatch, "row width differs from the column count");
  }
  rows.push_back(std::move(values));
  status.push_back(std::move(row_status));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "table has no column '" + name + "'");
}

std::vector<double> Table::column_values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_table_csv(std::ostream& out, const Table& table, const std::string& params_json) {
  if (params_json.find('\n') != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "params line must be a single line");
  }
  out << "# params: " << params_json << '\n';
  out << "# keys: " << table.key_columns << '\n';
  for (const auto& c : table.columns) out << c << ',';
  out << "status\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (double v : table.rows[r]) out << format_double(v) << ',';
    out << table.status[r] << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Io, "bad numeric cell '" + s + "'");
  }
  return v;
}

}  // namespace

CsvDocument read_table_csv(std::istream& in) {
  CsvDocument doc;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# params: ", 0) == 0) {
      doc.params_json = line.substr(10);
      continue;
    }
    if (line.rfind("# keys: ", 0) == 0) {
      doc.table.key_columns = static_cast<int>(parse_cell(line.substr(8)));
      continue;
    }
    if (line[0] == '#') continue;
    const auto cells = split(line);
    if (!have_header) {
      if (cells.empty() || cells.back() != "status") {
        throw Error(ErrorCode::Io, "CSV header must end with a status column");
      }
      doc.table.columns.assign(cells.begin(), cells.end() - 1);
      have_header = true;
      continue;
    }
    if (cells.size() != doc.table.columns.size() + 1) {
      throw Error(ErrorCode::Io, "CSV row width differs from its header");
    }
    std::vector<double> values;
    for (std::size_t k = 0; k + 1 < cells.size(); ++k) values.push_back(parse_cell(cells[k]));
    doc.table.add_row(std::move(values), cells.back());
  }
  if (!have_header) throw Error(ErrorCode::Io, "CSV has no header");
  return doc;
}

}  // namespace spinflip
