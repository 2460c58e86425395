#include "spinflip/dressed_model.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "spinflip/errors.hpp"
#include "spinflip/linalg.hpp"
#include "spinflip/units.hpp"

namespace spinflip {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw Error(ErrorCode::ConfigInvalid, std::string(field) + " " + what, field);
}

// Eigenvectors of [[0, g], [g, -delta]] written through the mixing angle
// theta in [0, pi), tan(theta) = -2g/delta.
struct Doublet {
  double theta;
  double lower_a, lower_r;
  double upper_a, upper_r;
  double e_lower, e_upper;
};

Doublet doublet(double coupling_rabi, double delta) {
  Doublet d{};
  d.theta = std::atan2(coupling_rabi, -delta);
  const double c = std::cos(0.5 * d.theta);
  const double s = std::sin(0.5 * d.theta);
  d.lower_a = c;
  d.lower_r = -s;
  d.upper_a = s;
  d.upper_r = c;
  const double split = std::hypot(coupling_rabi, delta);
  d.e_lower = -0.5 * delta - 0.5 * split;
  d.e_upper = -0.5 * delta + 0.5 * split;
  return d;
}

}  // namespace

double Interaction::value() const {
  if (!value_) throw Error(ErrorCode::InvalidArgument, "v_rr is infinite");
  return *value_;
}

Branch adiabatic_branch(double delta_L) { return delta_L <= 0.0 ? Branch::Lower : Branch::Upper; }

void DressingParams::validate() const {
  require(std::isfinite(omega_L) && omega_L > 0.0, "omega_L", "must be positive");
  require(std::isfinite(delta_L), "delta_L", "must be finite");
  require(std::isfinite(omega_mw) && omega_mw >= 0.0, "omega_mw", "must be non-negative");
  require(std::isfinite(delta_mw), "delta_mw", "must be finite");
  require(std::isfinite(gamma_r) && gamma_r >= 0.0, "gamma_r", "must be non-negative");
  if (!v_rr.is_infinite()) {
    require(std::isfinite(v_rr.value()) && v_rr.value() >= 0.0, "v_rr",
            "must be infinite or finite non-negative");
  }
}

DressingParams DressingParams::from_mhz(double omega_L_mhz, double delta_L_mhz,
                                        double omega_mw_mhz, Branch branch) {
  DressingParams p;
  p.omega_L = spinflip::from_mhz(omega_L_mhz);
  p.delta_L = spinflip::from_mhz(delta_L_mhz);
  p.omega_mw = spinflip::from_mhz(omega_mw_mhz);
  p.branch = branch;
  return p;
}

double DressedAtom::cos_half_theta() const { return std::abs(amp_a); }
double DressedAtom::sin_half_theta() const { return std::abs(amp_r); }

DressedAtom dress_single(const DressingParams& params) {
  params.validate();
  const Doublet d = doublet(params.omega_L, params.delta_L);
  DressedAtom atom;
  if (params.branch == Branch::Lower) {
    atom.amp_a = d.lower_a;
    atom.amp_r = d.lower_r;
    atom.theta = d.theta;
    atom.e_ls1 = d.e_lower;
    atom.e_other = d.e_upper;
  } else {
    atom.amp_a = d.upper_a;
    atom.amp_r = d.upper_r;
    atom.theta = kPi - d.theta;
    atom.e_ls1 = d.e_upper;
    atom.e_other = d.e_lower;
  }
  atom.omega_mw_eff = atom.cos_half_theta() * params.omega_mw;
  atom.gamma_eff = atom.amp_r * atom.amp_r * params.gamma_r;
  return atom;
}

DressedPair dress_pair(const DressingParams& params) {
  params.validate();
  const double g = kSqrt2 * params.omega_L / 2.0;

  Eigen::Matrix2d blockaded;
  blockaded << 0.0, g, g, -params.delta_L;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es2(blockaded);
  if (es2.eigenvalues()(1) - es2.eigenvalues()(0) < 1e-9 * std::max(1.0, std::abs(g))) {
    throw Error(ErrorCode::DegenerateBranch, "blockaded pair doublet is degenerate");
  }
  // SelfAdjointEigenSolver sorts ascending: column 0 is the lower branch.
  const int col = params.branch == Branch::Lower ? 0 : 1;
  Eigen::Vector2d v2 = es2.eigenvectors().col(col);
  if (v2(0) < 0 || (v2(0) == 0 && v2(1) < 0)) v2 = -v2;

  DressedPair pair;
  if (params.v_rr.is_infinite()) {
    pair.alpha = v2(0);
    pair.beta = v2(1);
    pair.gamma = 0.0;
    pair.e_ls2 = es2.eigenvalues()(col);
  } else {
    Eigen::Matrix3d full;
    full << 0.0, g, 0.0,
            g, -params.delta_L, g,
            0.0, g, -2.0 * params.delta_L + params.v_rr.value();
    const Eigen::Vector3d reference(v2(0), v2(1), 0.0);
    const SelectedEigenpair sel = select_adiabatic_eigenpair(full, reference);
    pair.alpha = sel.vector(0);
    pair.beta = sel.vector(1);
    pair.gamma = sel.vector(2);
    pair.e_ls2 = sel.value;
  }

  const DressedAtom atom = dress_single(params);
  pair.j = pair.e_ls2 - 2.0 * atom.e_ls1;
  pair.omega_mw_eff_prime =
      (pair.alpha * atom.amp_a + pair.beta * atom.amp_r / kSqrt2) * params.omega_mw;
  pair.gamma_eff_2 = (pair.beta * pair.beta + 2.0 * pair.gamma * pair.gamma) * params.gamma_r;
  return pair;
}

double entangling_energy_closed_form(double omega_L, double delta_L, Branch branch) {
  const double two_atom = std::sqrt(2.0 * omega_L * omega_L + delta_L * delta_L);
  const double one_atom = std::hypot(omega_L, delta_L);
  const double sign = branch == Branch::Lower ? -1.0 : 1.0;
  return 0.5 * (delta_L + sign * (two_atom - 2.0 * one_atom));
}

double entangling_energy(const DressingParams& params) {
  params.validate();
  if (params.v_rr.is_infinite()) {
    return entangling_energy_closed_form(params.omega_L, params.delta_L, params.branch);
  }
  return dress_pair(params).j;
}

WeakDressingAsymptotics weak_dressing_asymptotics(double omega_L, double omega_mw) {
  if (!(omega_L > 0.0) || !(omega_mw > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "omega_L and omega_mw must be positive");
  }
  WeakDressingAsymptotics w{};
  w.delta_wdr = std::pow(omega_L, 4.0 / 3.0) / (2.0 * std::cbrt(omega_mw));
  w.t_r_wdr = 3.5 / (std::pow(omega_L, 2.0 / 3.0) * std::cbrt(omega_mw));
  return w;
}

double weak_dressing_entangling_energy(double omega_L, double delta_L) {
  const double o2 = omega_L * omega_L;
  return -o2 * o2 / (8.0 * delta_L * delta_L * delta_L);
}

StrongDressingAsymptotics strong_dressing_asymptotics(double omega_L) {
  if (!(omega_L > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega_L must be positive");
  StrongDressingAsymptotics s{};
  s.j_max = (2.0 - kSqrt2) * omega_L / 2.0;
  s.t_r_sdr = 1.66 * kPi / omega_L;
  s.tau_limit = kPi / s.j_max;
  return s;
}

std::optional<double> detuning_for_entangling_energy(double omega_L, double target_j) {
  if (!(omega_L > 0.0) || !(target_j > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "omega_L and target_j must be positive");
  }
  auto j_of = [&](double delta) {
    return entangling_energy_closed_form(omega_L, delta, Branch::Lower);
  };
  if (target_j > j_of(0.0)) return std::nullopt;

  // J is monotone on the red side; widen until J drops below the target.
  double lo = -omega_L;
  while (j_of(lo) > target_j) lo *= 2.0;
  double hi = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::abs(lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (j_of(mid) > target_j) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace spinflip
