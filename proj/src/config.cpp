#include "spinflip/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spinflip/errors.hpp"
#include "spinflip/units.hpp"

namespace spinflip {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  // The field is reported by its last path component, e.g. "omega_L" for
  // physics.omega_L_mhz.
  std::string leaf = path.substr(path.rfind('.') + 1);
  for (const char* suffix : {"_mhz", "_per_us", "_us"}) {
    const std::string s = suffix;
    if (leaf.size() > s.size() && leaf.compare(leaf.size() - s.size(), s.size(), s) == 0) {
      leaf.resize(leaf.size() - s.size());
      break;
    }
  }
  throw Error(ErrorCode::ConfigInvalid, path + ": " + what, leaf);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) invalid(path, "must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) invalid(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

void read(const json& obj, const std::string& path, const char* key, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) invalid(join(path, key), "must be a number");
  out = v.get<double>();
  if (!std::isfinite(out)) invalid(join(path, key), "must be finite");
}

void read(const json& obj, const std::string& path, const char* key, int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) invalid(join(path, key), "must be an integer");
  out = v.get<int>();
}

void read(const json& obj, const std::string& path, const char* key, std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) invalid(join(path, key), "must be a string");
  out = v.get<std::string>();
}

void read_optional(const json& obj, const std::string& path, const char* key,
                   std::optional<double>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  double v = 0.0;
  read(obj, path, key, v);
  out = v;
}

void read_axis(const json& obj, const std::string& path, const char* key, SweepAxis& axis) {
  if (!obj.contains(key)) return;
  const std::string p = join(path, key);
  const json& a = obj.at(key);
  check_keys(a, p, {"min", "max", "count", "scale"});
  read(a, p, "min", axis.min);
  read(a, p, "max", axis.max);
  read(a, p, "count", axis.count);
  std::string scale = axis.scale == AxisScale::Log ? "log" : "linear";
  read(a, p, "scale", scale);
  if (scale != "log" && scale != "linear") invalid(p + ".scale", "must be 'linear' or 'log'");
  axis.scale = axis_scale_from_string(scale);
}

json axis_json(const SweepAxis& a) {
  return {{"min", a.min}, {"max", a.max}, {"count", a.count},
          {"scale", a.scale == AxisScale::Log ? "log" : "linear"}};
}

void validate_axis(const SweepAxis& a, const std::string& path) {
  try {
    a.validate();
  } catch (const Error& e) {
    invalid(path, e.what());
  }
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Dress: return "dress";
    case Command::Optimize: return "optimize";
    case Command::Qsl: return "qsl";
    case Command::SweepDetuning: return "sweep-detuning";
    case Command::SweepSurface: return "sweep-surface";
    case Command::SweepOptical: return "sweep-optical";
    case Command::Robust: return "robust";
    case Command::Scan: return "scan";
  }
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::Dress, Command::Optimize, Command::Qsl, Command::SweepDetuning,
                    Command::SweepSurface, Command::SweepOptical, Command::Robust, Command::Scan}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::ConfigInvalid, "command: unknown command '" + name + "'", "command");
}

DressingParams PhysicsConfig::to_params() const {
  DressingParams p;
  p.omega_L = from_mhz(omega_L_mhz);
  p.delta_L = from_mhz(delta_L_mhz);
  p.omega_mw = from_mhz(omega_mw_mhz);
  p.delta_mw = from_mhz(delta_mw_mhz);
  p.v_rr = v_rr_mhz ? Interaction::finite(from_mhz(*v_rr_mhz)) : Interaction::infinite();
  p.gamma_r = gamma_r_per_us;
  if (branch == "lower") {
    p.branch = Branch::Lower;
  } else if (branch == "upper") {
    p.branch = Branch::Upper;
  } else {
    p.branch = adiabatic_branch(p.delta_L);
  }
  return p;
}

double WaveformConfig::resolved_tau(double omega_mw) const {
  if (tau_us) return *tau_us;
  return tau_cycles.value_or(1.3) * kTwoPi / omega_mw;
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what(), "config");
  }
  check_keys(root, "", {"schema_version", "command", "seed", "physics", "waveform", "optimizer",
                        "qsl", "robust", "sweep", "scan"});
  RunConfig c;
  read(root, "", "schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    invalid("schema_version", "unsupported version " + std::to_string(c.schema_version));
  }
  if (!root.contains("command")) invalid("command", "is required");
  std::string command;
  read(root, "", "command", command);
  c.command = command_from_string(command);
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) invalid("seed", "must be a non-negative integer");
    c.seed = root.at("seed").get<std::uint64_t>();
  }

  if (root.contains("physics")) {
    const json& p = root.at("physics");
    check_keys(p, "physics", {"omega_L_mhz", "delta_L_mhz", "omega_mw_mhz", "delta_mw_mhz",
                              "v_rr_mhz", "gamma_r_per_us", "branch"});
    read(p, "physics", "omega_L_mhz", c.physics.omega_L_mhz);
    read(p, "physics", "delta_L_mhz", c.physics.delta_L_mhz);
    read(p, "physics", "omega_mw_mhz", c.physics.omega_mw_mhz);
    read(p, "physics", "delta_mw_mhz", c.physics.delta_mw_mhz);
    if (p.contains("v_rr_mhz") && p.at("v_rr_mhz").is_string()) {
      if (p.at("v_rr_mhz").get<std::string>() != "infinite") {
        invalid("physics.v_rr_mhz", "must be a number or \"infinite\"");
      }
    } else {
      read_optional(p, "physics", "v_rr_mhz", c.physics.v_rr_mhz);
    }
    read(p, "physics", "gamma_r_per_us", c.physics.gamma_r_per_us);
    read(p, "physics", "branch", c.physics.branch);
  }
  if (root.contains("waveform")) {
    const json& w = root.at("waveform");
    check_keys(w, "waveform", {"n_segments", "tau_us", "tau_cycles", "file"});
    read(w, "waveform", "n_segments", c.waveform.n_segments);
    read_optional(w, "waveform", "tau_us", c.waveform.tau_us);
    read_optional(w, "waveform", "tau_cycles", c.waveform.tau_cycles);
    read(w, "waveform", "file", c.waveform.file);
  }
  if (root.contains("optimizer")) {
    const json& o = root.at("optimizer");
    check_keys(o, "optimizer", {"max_iterations", "restarts", "epsilon_f", "gradient_tolerance",
                                "stop_fraction"});
    read(o, "optimizer", "max_iterations", c.optimizer.max_iterations);
    read(o, "optimizer", "restarts", c.optimizer.restarts);
    read(o, "optimizer", "epsilon_f", c.optimizer.epsilon_f);
    read(o, "optimizer", "gradient_tolerance", c.optimizer.gradient_tolerance);
    read(o, "optimizer", "stop_fraction", c.optimizer.stop_fraction);
  }
  if (root.contains("qsl")) {
    const json& q = root.at("qsl");
    check_keys(q, "qsl", {"epsilon", "tau_lo_cycles", "tau_hi_cycles", "rel_tol", "max_extensions"});
    read(q, "qsl", "epsilon", c.qsl.epsilon);
    read(q, "qsl", "tau_lo_cycles", c.qsl.tau_lo_cycles);
    read(q, "qsl", "tau_hi_cycles", c.qsl.tau_hi_cycles);
    read(q, "qsl", "rel_tol", c.qsl.rel_tol);
    read(q, "qsl", "max_extensions", c.qsl.max_extensions);
  }
  if (root.contains("robust")) {
    const json& r = root.at("robust");
    check_keys(r, "robust", {"members", "tau_factor", "omega_grid", "delta_grid_mhz"});
    if (r.contains("members")) {
      if (!r.at("members").is_array()) invalid("robust.members", "must be an array");
      c.robust.ensemble.members.clear();
      for (std::size_t k = 0; k < r.at("members").size(); ++k) {
        const std::string p = "robust.members[" + std::to_string(k) + "]";
        const json& m = r.at("members").at(k);
        check_keys(m, p, {"omega_factor1", "omega_factor2", "delta_offset1_mhz",
                          "delta_offset2_mhz", "weight"});
        EnsembleMember em;
        double d1 = 0.0, d2 = 0.0;
        read(m, p, "omega_factor1", em.omega_factor1);
        read(m, p, "omega_factor2", em.omega_factor2);
        read(m, p, "delta_offset1_mhz", d1);
        read(m, p, "delta_offset2_mhz", d2);
        read(m, p, "weight", em.weight);
        em.delta_offset1 = from_mhz(d1);
        em.delta_offset2 = from_mhz(d2);
        c.robust.ensemble.members.push_back(em);
      }
    }
    read(r, "robust", "tau_factor", c.robust.tau_factor);
    read_axis(r, "robust", "omega_grid", c.robust.omega_grid);
    read_axis(r, "robust", "delta_grid_mhz", c.robust.delta_grid_mhz);
  }
  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    check_keys(s, "sweep", {"delta_L_mhz", "omega_ratio", "delta_over_omega_L", "vrr_over_omega_L"});
    read_axis(s, "sweep", "delta_L_mhz", c.sweep.delta_L_mhz);
    read_axis(s, "sweep", "omega_ratio", c.sweep.omega_ratio);
    read_axis(s, "sweep", "delta_over_omega_L", c.sweep.delta_over_omega_L);
    read_axis(s, "sweep", "vrr_over_omega_L", c.sweep.vrr_over_omega_L);
  }
  if (root.contains("scan")) {
    const json& s = root.at("scan");
    check_keys(s, "scan", {"axis", "grid"});
    std::string axis = to_string(c.scan.axis);
    read(s, "scan", "axis", axis);
    c.scan.axis = scan_axis_from_string(axis);
    read_axis(s, "scan", "grid", c.scan.grid);
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read config file " + path.string(), "config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const RunConfig& c) {
  const PhysicsConfig& p = c.physics;
  if (!(p.omega_L_mhz > 0.0)) invalid("physics.omega_L_mhz", "must be positive");
  if (!(p.omega_mw_mhz > 0.0)) invalid("physics.omega_mw_mhz", "must be positive");
  if (p.v_rr_mhz && !(*p.v_rr_mhz >= 0.0)) invalid("physics.v_rr_mhz", "must be non-negative");
  if (!(p.gamma_r_per_us >= 0.0)) invalid("physics.gamma_r_per_us", "must be non-negative");
  if (p.branch != "lower" && p.branch != "upper" && p.branch != "auto") {
    invalid("physics.branch", "must be 'lower', 'upper' or 'auto'");
  }
  if (c.waveform.n_segments < 2) invalid("waveform.n_segments", "must be at least 2");
  if (c.waveform.tau_us && !(*c.waveform.tau_us > 0.0)) invalid("waveform.tau_us", "must be positive");
  if (c.waveform.tau_cycles && !(*c.waveform.tau_cycles > 0.0)) {
    invalid("waveform.tau_cycles", "must be positive");
  }
  if (c.optimizer.max_iterations < 1) invalid("optimizer.max_iterations", "must be positive");
  if (c.optimizer.restarts < 1) invalid("optimizer.restarts", "must be positive");
  if (!(c.optimizer.epsilon_f > 0.0 && c.optimizer.epsilon_f < 1.0)) {
    invalid("optimizer.epsilon_f", "must lie in (0, 1)");
  }
  if (!(c.optimizer.gradient_tolerance > 0.0)) invalid("optimizer.gradient_tolerance", "must be positive");
  if (!(c.optimizer.stop_fraction > 0.0 && c.optimizer.stop_fraction <= 1.0)) {
    invalid("optimizer.stop_fraction", "must lie in (0, 1]");
  }
  if (!(c.qsl.epsilon > 0.0 && c.qsl.epsilon < 1.0)) invalid("qsl.epsilon", "must lie in (0, 1)");
  if (!(c.qsl.tau_lo_cycles > 0.0 && c.qsl.tau_hi_cycles > c.qsl.tau_lo_cycles)) {
    invalid("qsl.tau_lo_cycles", "need 0 < tau_lo_cycles < tau_hi_cycles");
  }
  if (!(c.qsl.rel_tol > 0.0 && c.qsl.rel_tol < 1.0)) invalid("qsl.rel_tol", "must lie in (0, 1)");
  if (c.qsl.max_extensions < 0) invalid("qsl.max_extensions", "must be non-negative");
  try {
    c.robust.ensemble.validate();
  } catch (const Error& e) {
    invalid("robust.members", e.what());
  }
  if (!(c.robust.tau_factor > 0.0)) invalid("robust.tau_factor", "must be positive");
  validate_axis(c.robust.omega_grid, "robust.omega_grid");
  validate_axis(c.robust.delta_grid_mhz, "robust.delta_grid_mhz");
  validate_axis(c.sweep.delta_L_mhz, "sweep.delta_L_mhz");
  validate_axis(c.sweep.omega_ratio, "sweep.omega_ratio");
  validate_axis(c.sweep.delta_over_omega_L, "sweep.delta_over_omega_L");
  validate_axis(c.sweep.vrr_over_omega_L, "sweep.vrr_over_omega_L");
  validate_axis(c.scan.grid, "scan.grid");
  if (c.command == Command::Scan && c.waveform.file.empty()) {
    invalid("waveform.file", "scan needs a waveform file");
  }
}

std::string config_to_json(const RunConfig& c, int indent) {
  json j;
  j["schema_version"] = c.schema_version;
  j["command"] = to_string(c.command);
  j["seed"] = c.seed;
  const PhysicsConfig& p = c.physics;
  j["physics"] = {{"omega_L_mhz", p.omega_L_mhz},
                  {"delta_L_mhz", p.delta_L_mhz},
                  {"omega_mw_mhz", p.omega_mw_mhz},
                  {"delta_mw_mhz", p.delta_mw_mhz},
                  {"v_rr_mhz", p.v_rr_mhz ? json(*p.v_rr_mhz) : json("infinite")},
                  {"gamma_r_per_us", p.gamma_r_per_us},
                  {"branch", p.branch}};
  j["waveform"] = {{"n_segments", c.waveform.n_segments},
                   {"tau_us", c.waveform.tau_us ? json(*c.waveform.tau_us) : json(nullptr)},
                   {"tau_cycles", c.waveform.tau_cycles ? json(*c.waveform.tau_cycles) : json(nullptr)},
                   {"file", c.waveform.file}};
  j["optimizer"] = {{"max_iterations", c.optimizer.max_iterations},
                    {"restarts", c.optimizer.restarts},
                    {"epsilon_f", c.optimizer.epsilon_f},
                    {"gradient_tolerance", c.optimizer.gradient_tolerance},
                    {"stop_fraction", c.optimizer.stop_fraction}};
  j["qsl"] = {{"epsilon", c.qsl.epsilon},
              {"tau_lo_cycles", c.qsl.tau_lo_cycles},
              {"tau_hi_cycles", c.qsl.tau_hi_cycles},
              {"rel_tol", c.qsl.rel_tol},
              {"max_extensions", c.qsl.max_extensions}};
  json members = json::array();
  for (const auto& m : c.robust.ensemble.members) {
    members.push_back({{"omega_factor1", m.omega_factor1},
                       {"omega_factor2", m.omega_factor2},
                       {"delta_offset1_mhz", to_mhz(m.delta_offset1)},
                       {"delta_offset2_mhz", to_mhz(m.delta_offset2)},
                       {"weight", m.weight}});
  }
  j["robust"] = {{"members", members},
                 {"tau_factor", c.robust.tau_factor},
                 {"omega_grid", axis_json(c.robust.omega_grid)},
                 {"delta_grid_mhz", axis_json(c.robust.delta_grid_mhz)}};
  j["sweep"] = {{"delta_L_mhz", axis_json(c.sweep.delta_L_mhz)},
                {"omega_ratio", axis_json(c.sweep.omega_ratio)},
                {"delta_over_omega_L", axis_json(c.sweep.delta_over_omega_L)},
                {"vrr_over_omega_L", axis_json(c.sweep.vrr_over_omega_L)}};
  j["scan"] = {{"axis", to_string(c.scan.axis)}, {"grid", axis_json(c.scan.grid)}};
  return j.dump(indent);
}

}  // namespace spinflip
