#include "spinflip/experiments.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "spinflip/dressed_model.hpp"
#include "spinflip/errors.hpp"
#include "spinflip/gate_metrics.hpp"
#include "spinflip/optimizer.hpp"
#include "spinflip/units.hpp"

namespace spinflip {

namespace {

using nlohmann::json;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double from_json_number(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

// Shared driver: checkpoint lookup, parallel evaluation, ordered assembly.
ExperimentOutput run_points(std::vector<std::string> columns, int key_columns, std::size_t count,
                            const ExperimentSettings& settings,
                            const std::function<PointResult(std::size_t)>& compute) {
  std::vector<PointResult> results(count);
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(count, settings.workers, [&](std::size_t i) {
    std::optional<PointResult> cached;
    if (settings.store) cached = settings.store->load(i);
    if (cached && cached->values.size() == columns.size()) {
      results[i] = std::move(*cached);
    } else {
      results[i] = compute(i);
      if (settings.store) settings.store->save(i, results[i]);
    }
    if (settings.progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      settings.progress(++done, count);
    }
  });

  ExperimentOutput out;
  out.table.columns = std::move(columns);
  out.table.key_columns = key_columns;
  for (auto& r : results) {
    out.table.add_row(r.values, r.status);
    out.waveforms.push_back(std::move(r.waveform));
  }
  return out;
}

struct QslPoint {
  double tau_star = kNaN;
  double fidelity = kNaN;
  std::optional<PhaseWaveform> waveform;
  std::string status = "ok";
};

QslPoint find_qsl(const ControlSystem& system, double cycle, const ExperimentSettings& settings,
                  std::uint64_t seed) {
  QslOptions q = settings.qsl;
  q.tau_lo = settings.tau_lo_cycles * cycle;
  q.tau_hi = settings.tau_hi_cycles * cycle;
  OptimizeOptions o = settings.optimizer;
  o.seed = seed;
  const int n = settings.n_segments;
  QslPoint out;
  try {
    const QslResult r = qsl_search(
        [&](double tau) { return ControlProblem::single(system, n, tau); }, q, o);
    out.tau_star = r.tau_star;
    out.fidelity = r.fidelity;
    out.waveform = r.waveform;
  } catch (const Error& e) {
    out.status = std::string(to_string(e.code()));
  }
  return out;
}

double unitary_rydberg_time(const ControlSystem& system, const PhaseWaveform& wf) {
  PropagateOptions opts;
  opts.keep_segments = false;
  return propagate(system.with_decay(0.0), wf, {"01", "10", "11"}, opts).t_r;
}

double lossy_fidelity(const ControlSystem& system, const PhaseWaveform& wf, double gamma_r) {
  PropagateOptions opts;
  opts.keep_segments = false;
  opts.record_trajectories = false;
  const GateRecord rec = propagate(system.with_decay(gamma_r), wf, {"01", "10", "11"}, opts);
  return decay_limited_fidelity(rec, gamma_r, DecayMethod::NonHermitian);
}

}  // namespace

PointStore::PointStore(std::filesystem::path dir, std::string fingerprint)
    : dir_(std::move(dir)), fingerprint_(std::move(fingerprint)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create checkpoint directory " + dir_.string());
}

std::filesystem::path PointStore::path_for(std::size_t index) const {
  char name[32];
  std::snprintf(name, sizeof name, "%06zu.json", index);
  return dir_ / name;
}

std::optional<PointResult> PointStore::load(std::size_t index) const {
  std::ifstream in(path_for(index));
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.at("fingerprint").get<std::string>() != fingerprint_) return std::nullopt;
    PointResult r;
    for (const auto& v : j.at("values")) r.values.push_back(from_json_number(v));
    r.status = j.at("status").get<std::string>();
    if (j.contains("waveform")) {
      const auto& w = j.at("waveform");
      r.waveform = PhaseWaveform(w.at("phases").get<std::vector<double>>(), w.at("tau_us").get<double>());
    }
    return r;
  } catch (const std::exception&) {
    // A truncated file from an interrupted run is simply recomputed.
    return std::nullopt;
  }
}

void PointStore::save(std::size_t index, const PointResult& result) const {
  json j;
  j["fingerprint"] = fingerprint_;
  j["values"] = json::array();
  for (double v : result.values) j["values"].push_back(number(v));
  j["status"] = result.status;
  if (result.waveform) {
    j["waveform"] = {{"tau_us", result.waveform->tau}, {"phases", result.waveform->phases}};
  }
  // Write-then-rename so a killed run never leaves a half-written point.
  const auto target = path_for(index);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCode::Io, "cannot write checkpoint " + tmp.string());
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, target);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t n_threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

ExperimentOutput run_detuning_sweep(double omega_L, double omega_mw,
                                    const std::vector<double>& delta_grid, double gamma_r,
                                    const ExperimentSettings& settings) {
  if (!(omega_mw > 0.0)) throw Error(ErrorCode::ConfigInvalid, "omega_mw must be positive", "omega_mw");
  if (delta_grid.empty()) throw Error(ErrorCode::ConfigInvalid, "empty detuning grid", "delta_grid");
  std::vector<std::string> columns = {
      "delta_L_mhz", "j_mhz", "omega_mw_eff_mhz", "omega_mw_eff_prime_mhz",
      "gamma_a_over_gamma_r", "gamma_aa_over_gamma_r", "tau_star_us", "tau_star_cycles",
      "fidelity", "t_r_us", "f_r"};
  const double cycle = kTwoPi / omega_mw;
  return run_points(columns, 1, delta_grid.size(), settings, [&](std::size_t i) {
    DressingParams p;
    p.omega_L = omega_L;
    p.delta_L = delta_grid[i];
    p.omega_mw = omega_mw;
    p.branch = adiabatic_branch(p.delta_L);
    const DressedAtom atom = dress_single(p);
    const DressedPair pair = dress_pair(p);
    const ControlSystem system = microwave_system(p);
    const QslPoint q = find_qsl(system, cycle, settings, derive_seed(settings.seed, i));

    PointResult r;
    double t_r = kNaN, f_r = kNaN;
    if (q.waveform) {
      t_r = unitary_rydberg_time(system, *q.waveform);
      f_r = gamma_r > 0.0 ? lossy_fidelity(system, *q.waveform, gamma_r) : q.fidelity;
    }
    r.values = {to_mhz(p.delta_L), to_mhz(pair.j), to_mhz(atom.omega_mw_eff),
                to_mhz(pair.omega_mw_eff_prime), atom.amp_r * atom.amp_r,
                pair.beta * pair.beta + 2.0 * pair.gamma * pair.gamma, q.tau_star,
                q.tau_star / cycle, q.fidelity, t_r, f_r};
    r.status = q.status;
    r.waveform = q.waveform;
    return r;
  });
}

ExperimentOutput run_qsl_surface(double omega_mw, const std::vector<double>& ratio_grid,
                                 const std::vector<double>& detuning_grid,
                                 const ExperimentSettings& settings) {
  if (!(omega_mw > 0.0)) throw Error(ErrorCode::ConfigInvalid, "omega_mw must be positive", "omega_mw");
  if (ratio_grid.empty() || detuning_grid.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "empty surface grid", "sweep");
  }
  std::vector<std::string> columns = {
      "omega_ratio", "delta_over_omega_L", "j_over_omega_mw", "tau_star_us", "tau_star_cycles",
      "fidelity", "t_r_us", "delta_contour_over_omega_L", "delta_wdr_over_omega_L",
      "tau_wdr_cycles", "tau_sdr_cycles", "t_r_wdr_us", "t_r_sdr_us"};
  const double cycle = kTwoPi / omega_mw;
  const std::size_t nd = detuning_grid.size();
  return run_points(columns, 2, ratio_grid.size() * nd, settings, [&](std::size_t i) {
    const double ratio = ratio_grid[i / nd];
    const double d = detuning_grid[i % nd];
    DressingParams p;
    p.omega_L = ratio * omega_mw;
    p.delta_L = d * p.omega_L;
    p.omega_mw = omega_mw;
    p.branch = adiabatic_branch(p.delta_L);
    const double j = entangling_energy(p);
    const auto wdr = weak_dressing_asymptotics(p.omega_L, omega_mw);
    const auto sdr = strong_dressing_asymptotics(p.omega_L);
    const auto contour = detuning_for_entangling_energy(p.omega_L, omega_mw);

    const ControlSystem system = microwave_system(p);
    const QslPoint q = find_qsl(system, cycle, settings, derive_seed(settings.seed, i));
    const double t_r = q.waveform ? unitary_rydberg_time(system, *q.waveform) : kNaN;

    PointResult r;
    r.values = {ratio, d, j / omega_mw, q.tau_star, q.tau_star / cycle, q.fidelity, t_r,
                contour ? *contour / p.omega_L : kNaN, -wdr.delta_wdr / p.omega_L, 1.11,
                sdr.tau_limit / cycle, wdr.t_r_wdr, sdr.t_r_sdr};
    r.status = q.status;
    r.waveform = q.waveform;
    return r;
  });
}

ExperimentOutput run_optical_blockade_sweep(const std::vector<double>& vrr_over_omega,
                                            const ExperimentSettings& settings) {
  if (vrr_over_omega.empty()) throw Error(ErrorCode::ConfigInvalid, "empty blockade grid", "sweep");
  for (double v : vrr_over_omega) {
    if (!(v > 0.0 && std::isfinite(v))) {
      throw Error(ErrorCode::ConfigInvalid, "blockade ratios must be positive", "vrr_over_omega");
    }
  }
  std::vector<std::string> columns = {"vrr_over_omega_L", "tau_star_omega_L", "pi_over_vrr",
                                      "fidelity", "t_r_omega_L"};
  const double omega_L = 1.0;
  const double cycle = kTwoPi / omega_L;
  return run_points(columns, 1, vrr_over_omega.size(), settings, [&](std::size_t i) {
    const double v = vrr_over_omega[i] * omega_L;
    const ControlSystem system = optical_system(omega_L, 0.0, Interaction::finite(v));
    const QslPoint q = find_qsl(system, cycle, settings, derive_seed(settings.seed, i));
    const double t_r = q.waveform ? unitary_rydberg_time(system, *q.waveform) : kNaN;
    PointResult r;
    r.values = {vrr_over_omega[i], q.tau_star * omega_L, kPi / vrr_over_omega[i], q.fidelity,
                t_r * omega_L};
    r.status = q.status;
    r.waveform = q.waveform;
    return r;
  });
}

RobustComparison run_robust_comparison(const DressingParams& nominal, const EnsembleSpec& spec,
                                       const std::vector<double>& omega_factor_grid,
                                       const std::vector<double>& delta_offset_mhz_grid,
                                       double robust_tau_factor,
                                       const ExperimentSettings& settings) {
  nominal.validate();
  spec.validate();
  if (!(robust_tau_factor > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "robust gate-time factor must be positive", "tau_factor");
  }
  DressingParams unitary = nominal;
  unitary.gamma_r = 0.0;
  const ControlSystem system = microwave_system(unitary);
  const double cycle = kTwoPi / nominal.omega_mw;

  const QslPoint q = find_qsl(system, cycle, settings, derive_seed(settings.seed, 0));
  if (!q.waveform) throw Error(ErrorCode::BracketFailed, "no QSL found for the nominal gate");

  RobustComparison out;
  out.tau_optimal = q.tau_star;
  out.optimal = *q.waveform;
  out.optimal_fidelity = q.fidelity;
  out.tau_robust = robust_tau_factor * q.tau_star;

  OptimizeOptions o = settings.optimizer;
  o.seed = derive_seed(settings.seed, 1);
  const RobustResult rr = optimize_robust(spec, unitary, out.optimal.with_tau(out.tau_robust), o);
  out.robust = rr.optimization.waveform;
  out.robust_ensemble_fidelity = rr.ensemble_fidelity;
  out.robust_nominal_fidelity =
      problem_fidelity(ControlProblem::single(system, out.robust.n_segments(), out.robust.tau), out.robust);

  auto scan_table = [&](ScanAxis axis, const std::vector<double>& grid, const char* key) {
    const SensitivityCurve a = sensitivity_scan(out.optimal, nominal, axis, grid);
    const SensitivityCurve b = sensitivity_scan(out.robust, nominal, axis, grid);
    Table t;
    t.columns = {key, "fidelity_unitary_optimal", "fidelity_decay_optimal",
                 "fidelity_unitary_robust", "fidelity_decay_robust", "t_r_optimal_us",
                 "t_r_robust_us"};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      t.add_row({grid[k], a.fidelity_unitary[k], a.fidelity_decay[k], b.fidelity_unitary[k],
                 b.fidelity_decay[k], a.t_r[k], b.t_r[k]});
    }
    return t;
  };
  out.omega_scan = scan_table(ScanAxis::OmegaLCommon, omega_factor_grid, "omega_factor");
  out.delta_scan = scan_table(ScanAxis::DeltaL1, delta_offset_mhz_grid, "delta_offset_mhz");
  return out;
}

}  // namespace spinflip
