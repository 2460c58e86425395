#include "spinflip/run.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "spinflip/dressed_model.hpp"
#include "spinflip/experiments.hpp"
#include "spinflip/gate_metrics.hpp"
#include "spinflip/optimizer.hpp"
#include "spinflip/propagator.hpp"
#include "spinflip/table.hpp"
#include "spinflip/units.hpp"
#include "spinflip/waveform_io.hpp"

namespace spinflip {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string(), "out");
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string(), "out");
  }
  fs::rename(tmp, path);
}

void write_table(const fs::path& path, const Table& table, const std::string& params) {
  std::ostringstream ss;
  write_table_csv(ss, table, params);
  write_text(path, ss.str());
}

void write_manifest(const fs::path& dir, const RunConfig& config, const json& results) {
  json m;
  m["tool"] = "spinflip";
  m["version"] = kToolVersion;
  m["schema_version"] = kSchemaVersion;
  m["command"] = to_string(config.command);
  m["seed"] = config.seed;
  m["config"] = json::parse(config_to_json(config));
  m["results"] = results;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::string params_line(const RunConfig& config) { return json::parse(config_to_json(config)).dump(); }

void say(const RunOptions& o, const std::string& line) {
  if (o.log) *o.log << line << '\n';
}

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

PhaseWaveform initial_waveform(const RunConfig& c, double tau) {
  if (c.waveform.file.empty()) return PhaseWaveform::constant(c.waveform.n_segments, tau);
  PhaseWaveform wf = load_waveform(c.waveform.file);
  if (wf.n_segments() != c.waveform.n_segments) wf = wf.resampled(c.waveform.n_segments);
  return wf.with_tau(tau);
}

ExperimentSettings settings_for(const RunConfig& c, const RunOptions& o) {
  ExperimentSettings s;
  s.n_segments = c.waveform.n_segments;
  s.optimizer = c.optimizer;
  s.qsl.epsilon = c.qsl.epsilon;
  s.qsl.rel_tol = c.qsl.rel_tol;
  s.qsl.max_extensions = c.qsl.max_extensions;
  s.tau_lo_cycles = c.qsl.tau_lo_cycles;
  s.tau_hi_cycles = c.qsl.tau_hi_cycles;
  s.workers = o.workers;
  s.seed = c.seed;
  return s;
}

// Decay-free fidelity and T_r plus both decay-limited estimates.
struct GateSummary {
  double fidelity = 0.0;
  double t_r = 0.0;
  double f_r_tr_estimate = 0.0;
  double f_r_nonhermitian = 0.0;
};

GateSummary summarize_gate(const DressingParams& params, const PhaseWaveform& wf) {
  DressingParams unitary = params;
  unitary.gamma_r = 0.0;
  const ControlSystem system = microwave_system(unitary);
  const RydbergTimeEstimate est = converged_rydberg_time(system, wf);
  PropagateOptions po;
  po.substeps = est.substeps;
  po.keep_segments = false;
  const GateRecord rec = propagate(system, wf, {"01", "10", "11"}, po);
  GateSummary s;
  s.fidelity = cz_fidelity(rec.basis, rec.u_total).fidelity;
  s.t_r = rec.t_r;
  s.f_r_tr_estimate = decay_limited_fidelity(rec, params.gamma_r, DecayMethod::TrEstimate);
  if (params.gamma_r > 0.0) {
    PropagateOptions lossy;
    lossy.keep_segments = false;
    lossy.record_trajectories = false;
    const GateRecord r2 = propagate(system.with_decay(params.gamma_r), wf, {"01", "10", "11"}, lossy);
    s.f_r_nonhermitian = decay_limited_fidelity(r2, params.gamma_r, DecayMethod::NonHermitian);
  } else {
    s.f_r_nonhermitian = s.fidelity;
  }
  return s;
}

json gate_json(const GateSummary& g) {
  return {{"fidelity", number(g.fidelity)},
          {"t_r_us", number(g.t_r)},
          {"f_r_tr_estimate", number(g.f_r_tr_estimate)},
          {"f_r_nonhermitian", number(g.f_r_nonhermitian)}};
}

void run_dress(const RunConfig& c, const RunOptions& o) {
  const DressingParams p = c.physics.to_params();
  p.validate();
  const DressedAtom atom = dress_single(p);
  const DressedPair pair = dress_pair(p);
  const double g_a = atom.amp_r * atom.amp_r;
  const double g_aa = pair.beta * pair.beta + 2.0 * pair.gamma * pair.gamma;

  Table t;
  t.columns = {"omega_L_mhz", "delta_L_mhz", "j_mhz", "amp_a", "amp_r", "alpha", "beta", "gamma",
               "gamma_a_over_gamma_r", "gamma_aa_over_gamma_r", "omega_mw_eff_mhz",
               "omega_mw_eff_prime_mhz", "e_ls1_mhz", "e_ls2_mhz"};
  t.key_columns = 2;
  t.add_row({c.physics.omega_L_mhz, c.physics.delta_L_mhz, to_mhz(pair.j), atom.amp_a, atom.amp_r,
             pair.alpha, pair.beta, pair.gamma, g_a, g_aa, to_mhz(atom.omega_mw_eff),
             to_mhz(pair.omega_mw_eff_prime), to_mhz(atom.e_ls1), to_mhz(pair.e_ls2)});
  write_table(o.out_dir / "results.csv", t, params_line(c));

  say(o, "J/2pi             = " + fmt("%.6f MHz", to_mhz(pair.j)));
  say(o, "|a~>  amplitudes  = " + fmt("%.4f", std::abs(atom.amp_a)) + " " + fmt("%.4f", std::abs(atom.amp_r)));
  say(o, "|aa~> amplitudes  = " + fmt("%.4f", std::abs(pair.alpha)) + " " + fmt("%.4f", std::abs(pair.beta)) +
             " " + fmt("%.4f", std::abs(pair.gamma)));
  say(o, "Gamma_a / Gamma_r  = " + fmt("%.4f", g_a));
  say(o, "Gamma_aa / Gamma_r = " + fmt("%.4f", g_aa));
  say(o, "Omega_mw~ / 2pi   = " + fmt("%.6f MHz", to_mhz(atom.omega_mw_eff)));
  say(o, "Omega_mw~' / 2pi  = " + fmt("%.6f MHz", to_mhz(pair.omega_mw_eff_prime)));

  write_manifest(o.out_dir, c,
                 {{"j_mhz", to_mhz(pair.j)},
                  {"amp_a", atom.amp_a},
                  {"amp_r", atom.amp_r},
                  {"alpha", pair.alpha},
                  {"beta", pair.beta},
                  {"gamma", pair.gamma},
                  {"gamma_a_over_gamma_r", g_a},
                  {"gamma_aa_over_gamma_r", g_aa},
                  {"omega_mw_eff_mhz", to_mhz(atom.omega_mw_eff)},
                  {"omega_mw_eff_prime_mhz", to_mhz(pair.omega_mw_eff_prime)}});
}

void run_optimize(const RunConfig& c, const RunOptions& o) {
  const DressingParams p = c.physics.to_params();
  p.validate();
  DressingParams unitary = p;
  unitary.gamma_r = 0.0;
  const double tau = c.waveform.resolved_tau(p.omega_mw);
  const ControlProblem problem =
      ControlProblem::single(microwave_system(unitary), c.waveform.n_segments, tau);
  OptimizeOptions opts = c.optimizer;
  opts.seed = c.seed;
  const OptimizeResult r = optimize_waveform(problem, initial_waveform(c, tau), opts);
  save_waveform(o.out_dir / "waveform.txt", r.waveform);
  const GateSummary g = summarize_gate(p, r.waveform);

  Table t;
  t.columns = {"tau_us", "n_segments", "fidelity", "t_r_us", "f_r_tr_estimate", "f_r_nonhermitian",
               "iterations", "converged"};
  t.add_row({tau, static_cast<double>(c.waveform.n_segments), g.fidelity, g.t_r, g.f_r_tr_estimate,
             g.f_r_nonhermitian, static_cast<double>(r.iterations), r.converged ? 1.0 : 0.0},
            r.converged ? "ok" : "NO_CONVERGENCE");
  write_table(o.out_dir / "results.csv", t, params_line(c));

  Table trace;
  trace.columns = {"iteration", "objective"};
  for (std::size_t k = 0; k < r.trace.size(); ++k) trace.add_row({static_cast<double>(k), r.trace[k]});
  write_table(o.out_dir / "trace.csv", trace, params_line(c));

  say(o, "tau        = " + fmt("%.6f us", tau));
  say(o, "F          = " + fmt("%.8f", g.fidelity));
  say(o, "T_r        = " + fmt("%.6f us", g.t_r));
  say(o, "F_r (T_r)  = " + fmt("%.6f", g.f_r_tr_estimate));
  say(o, "F_r (H_eff)= " + fmt("%.6f", g.f_r_nonhermitian));

  json res = gate_json(g);
  res["tau_us"] = tau;
  res["n_segments"] = c.waveform.n_segments;
  res["iterations"] = r.iterations;
  res["converged"] = r.converged;
  write_manifest(o.out_dir, c, res);
}

void run_qsl(const RunConfig& c, const RunOptions& o) {
  const DressingParams p = c.physics.to_params();
  p.validate();
  DressingParams unitary = p;
  unitary.gamma_r = 0.0;
  const ControlSystem system = microwave_system(unitary);
  const double cycle = kTwoPi / p.omega_mw;
  const int n = c.waveform.n_segments;
  QslOptions q;
  q.epsilon = c.qsl.epsilon;
  q.rel_tol = c.qsl.rel_tol;
  q.max_extensions = c.qsl.max_extensions;
  q.tau_lo = c.qsl.tau_lo_cycles * cycle;
  q.tau_hi = c.qsl.tau_hi_cycles * cycle;
  OptimizeOptions opts = c.optimizer;
  opts.seed = c.seed;
  std::optional<PhaseWaveform> init;
  if (!c.waveform.file.empty()) init = initial_waveform(c, q.tau_hi);
  const QslResult r = qsl_search(
      [&](double tau) { return ControlProblem::single(system, n, tau); }, q, opts, init);
  save_waveform(o.out_dir / "waveform.txt", r.waveform);
  const GateSummary g = summarize_gate(p, r.waveform);

  Table t;
  t.columns = {"tau_us", "tau_cycles", "fidelity", "reached"};
  for (const auto& probe : r.probes) {
    t.add_row({probe.tau, probe.tau / cycle, probe.fidelity, probe.reached ? 1.0 : 0.0});
  }
  write_table(o.out_dir / "results.csv", t, params_line(c));

  say(o, "tau*       = " + fmt("%.6f us", r.tau_star) + fmt(" (%.4f cycles)", r.tau_star / cycle));
  say(o, "F          = " + fmt("%.8f", r.fidelity));
  say(o, "T_r        = " + fmt("%.6f us", g.t_r));
  say(o, "F_r (H_eff)= " + fmt("%.6f", g.f_r_nonhermitian));

  json res = gate_json(g);
  res["tau_star_us"] = r.tau_star;
  res["tau_star_cycles"] = r.tau_star / cycle;
  res["bracket_lo_us"] = r.bracket_lo;
  res["bracket_hi_us"] = r.bracket_hi;
  res["probes"] = r.probes.size();
  write_manifest(o.out_dir, c, res);
}

void run_sweep(const RunConfig& c, const RunOptions& o) {
  const fs::path points = o.out_dir / "points";
  const fs::path waves = o.out_dir / "waveforms";
  if (!o.resume) fs::remove_all(points);
  fs::remove_all(waves);
  fs::create_directories(points);
  fs::create_directories(waves);
  const PointStore store(points, config_fingerprint(c));
  ExperimentSettings s = settings_for(c, o);
  s.store = &store;
  s.progress = [&](std::size_t done, std::size_t total) {
    say(o, "point " + std::to_string(done) + "/" + std::to_string(total));
  };

  ExperimentOutput out;
  switch (c.command) {
    case Command::SweepDetuning: {
      const DressingParams p = c.physics.to_params();
      std::vector<double> grid;
      for (double d : c.sweep.delta_L_mhz.values()) grid.push_back(from_mhz(d));
      out = run_detuning_sweep(p.omega_L, p.omega_mw, grid, p.gamma_r, s);
      break;
    }
    case Command::SweepSurface:
      out = run_qsl_surface(from_mhz(c.physics.omega_mw_mhz), c.sweep.omega_ratio.values(),
                            c.sweep.delta_over_omega_L.values(), s);
      break;
    default:
      out = run_optical_blockade_sweep(c.sweep.vrr_over_omega_L.values(), s);
      break;
  }
  write_table(o.out_dir / "results.csv", out.table, params_line(c));
  std::size_t ok = 0;
  for (std::size_t i = 0; i < out.waveforms.size(); ++i) {
    if (out.table.status[i] == "ok") ++ok;
    if (!out.waveforms[i]) continue;
    char name[32];
    std::snprintf(name, sizeof name, "point_%06zu.txt", i);
    save_waveform(waves / name, *out.waveforms[i]);
  }
  say(o, std::to_string(ok) + "/" + std::to_string(out.table.size()) + " points ok");
  write_manifest(o.out_dir, c,
                 {{"rows", out.table.size()},
                  {"ok_rows", ok},
                  {"failed_rows", out.table.size() - ok},
                  {"columns", out.table.columns}});
}

void run_robust(const RunConfig& c, const RunOptions& o) {
  const DressingParams p = c.physics.to_params();
  p.validate();
  const RobustComparison r =
      run_robust_comparison(p, c.robust.ensemble, c.robust.omega_grid.values(),
                            c.robust.delta_grid_mhz.values(), c.robust.tau_factor, settings_for(c, o));
  const std::string params = params_line(c);
  write_table(o.out_dir / "omega_scan.csv", r.omega_scan, params);
  write_table(o.out_dir / "delta_scan.csv", r.delta_scan, params);
  save_waveform(o.out_dir / "waveform_optimal.txt", r.optimal);
  save_waveform(o.out_dir / "waveform_robust.txt", r.robust);
  const GateSummary go = summarize_gate(p, r.optimal);
  const GateSummary gr = summarize_gate(p, r.robust);

  Table t;
  t.columns = {"waveform", "tau_us", "fidelity", "ensemble_fidelity", "t_r_us", "f_r_nonhermitian"};
  t.add_row({0.0, r.tau_optimal, go.fidelity, NAN, go.t_r, go.f_r_nonhermitian});
  t.add_row({1.0, r.tau_robust, gr.fidelity, r.robust_ensemble_fidelity, gr.t_r, gr.f_r_nonhermitian});
  write_table(o.out_dir / "results.csv", t, params);

  say(o, "optimal: tau = " + fmt("%.6f us", r.tau_optimal) + ", F = " + fmt("%.8f", go.fidelity) +
             ", F_r = " + fmt("%.6f", go.f_r_nonhermitian));
  say(o, "robust:  tau = " + fmt("%.6f us", r.tau_robust) + ", F = " + fmt("%.8f", gr.fidelity) +
             ", ensemble F = " + fmt("%.8f", r.robust_ensemble_fidelity) +
             ", F_r = " + fmt("%.6f", gr.f_r_nonhermitian));

  json jo = gate_json(go);
  jo["tau_us"] = r.tau_optimal;
  json jr = gate_json(gr);
  jr["tau_us"] = r.tau_robust;
  jr["ensemble_fidelity"] = number(r.robust_ensemble_fidelity);
  write_manifest(o.out_dir, c, {{"optimal", jo}, {"robust", jr}});
}

void run_scan(const RunConfig& c, const RunOptions& o) {
  const DressingParams p = c.physics.to_params();
  p.validate();
  const PhaseWaveform wf = load_waveform(c.waveform.file);
  const SensitivityCurve curve = sensitivity_scan(wf, p, c.scan.axis, c.scan.grid.values());
  std::ostringstream ss;
  write_sensitivity_csv(ss, curve);
  write_text(o.out_dir / "scan.csv", ss.str());

  Table t;
  t.columns = {c.scan.axis == ScanAxis::OmegaLCommon ? "omega_factor" : "delta_offset_mhz",
               "fidelity_unitary", "fidelity_decay", "t_r_us"};
  double worst = 1.0;
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    t.add_row({curve.grid[k], curve.fidelity_unitary[k], curve.fidelity_decay[k], curve.t_r[k]});
    worst = std::min(worst, curve.fidelity_unitary[k]);
  }
  write_table(o.out_dir / "results.csv", t, params_line(c));
  say(o, "scanned " + std::to_string(curve.grid.size()) + " points, worst unitary F = " + fmt("%.8f", worst));
  write_manifest(o.out_dir, c,
                 {{"axis", to_string(c.scan.axis)},
                  {"points", curve.grid.size()},
                  {"worst_fidelity_unitary", number(worst)}});
}

}  // namespace

std::string config_fingerprint(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(config, -1)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void run(const RunConfig& config, const RunOptions& options) {
  validate_config(config);
  if (options.workers < 1) throw Error(ErrorCode::ConfigInvalid, "workers must be positive", "workers");
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + options.out_dir.string(), "out");
  fs::remove(options.out_dir / "error.json", ec);

  switch (config.command) {
    case Command::Dress: run_dress(config, options); break;
    case Command::Optimize: run_optimize(config, options); break;
    case Command::Qsl: run_qsl(config, options); break;
    case Command::SweepDetuning:
    case Command::SweepSurface:
    case Command::SweepOptical: run_sweep(config, options); break;
    case Command::Robust: run_robust(config, options); break;
    case Command::Scan: run_scan(config, options); break;
  }
}

void write_error_record(const fs::path& out_dir, const Error& error) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  json j = {{"code", std::string(to_string(error.code()))},
            {"message", error.what()},
            {"field", error.field()}};
  std::ofstream out(out_dir / "error.json");
  out << j.dump(2) << "\n";
}

}  // namespace spinflip
