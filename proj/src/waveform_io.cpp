#include "spinflip/waveform_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "spinflip/errors.hpp"
#include "spinflip/units.hpp"

namespace spinflip {

namespace {

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, int line_no) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) {
    throw Error(ErrorCode::Io, "waveform line " + std::to_string(line_no) + ": bad number '" + t + "'");
  }
  return v;
}

// Reads the next non-empty line, returns false at end of input.
bool next_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (!line.empty()) return true;
  }
  return false;
}

std::string header_value(std::istream& in, const std::string& key, int& line_no) {
  std::string line;
  if (!next_line(in, line, line_no) || line.rfind(key + "=", 0) != 0) {
    throw Error(ErrorCode::Io, "waveform header must contain '" + key + "=' at line " +
                                   std::to_string(line_no));
  }
  return line.substr(key.size() + 1);
}

}  // namespace

void write_waveform(std::ostream& out, const PhaseWaveform& wf) {
  wf.validate();
  out << "N=" << wf.n_segments() << '\n';
  out << "tau_us=" << format17(wf.tau) << '\n';
  for (double p : wf.phases) out << format17(wrap_phase(p)) << '\n';
}

PhaseWaveform read_waveform(std::istream& in) {
  int line_no = 0;
  const std::string n_text = trim(header_value(in, "N", line_no));
  int n = 0;
  const auto [ptr, ec] = std::from_chars(n_text.data(), n_text.data() + n_text.size(), n);
  if (ec != std::errc{} || ptr != n_text.data() + n_text.size() || n < 1) {
    throw Error(ErrorCode::Io, "waveform N must be a positive integer");
  }
  const double tau = parse_double(header_value(in, "tau_us", line_no), line_no);

  std::vector<double> phases;
  phases.reserve(static_cast<std::size_t>(n));
  std::string line;
  while (next_line(in, line, line_no)) phases.push_back(parse_double(line, line_no));
  if (static_cast<int>(phases.size()) != n) {
    throw Error(ErrorCode::Io, "waveform declares N=" + std::to_string(n) + " but lists " +
                                   std::to_string(phases.size()) + " phases");
  }
  PhaseWaveform wf(std::move(phases), tau);
  wf.validate();
  return wf;
}

void save_waveform(const std::filesystem::path& path, const PhaseWaveform& wf) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_waveform(out, wf);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

PhaseWaveform load_waveform(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_waveform(in);
}

}  // namespace spinflip
