#include "spinflip/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "spinflip/errors.hpp"
#include "spinflip/linalg.hpp"

namespace spinflip {

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Level indices in the single-atom bases.
constexpr int kOne = 1;
constexpr int kAux = 2;
constexpr int kRyd = 3;
constexpr int kOptRyd = 2;

OperatorMatrix tensor_sum(const OperatorMatrix& h1, const OperatorMatrix& h2, Interaction v_rr) {
  const int d = h1.basis.dim();
  const bool drop_rr = v_rr.is_infinite();
  OperatorMatrix out;
  out.basis = two_atom_basis(h1.basis, drop_rr);
  const int n = out.basis.dim();
  out.matrix = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const int row = d * i + j;
      if (row >= n) continue;
      for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
          const int col = d * k + l;
          if (col >= n) continue;
          cplx value{};
          if (j == l) value += h1.matrix(i, k);
          if (i == k) value += h2.matrix(j, l);
          out.matrix(row, col) = value;
        }
      }
    }
  }
  if (!drop_rr) out.matrix(n - 1, n - 1) += v_rr.value();
  out.hermitian = h1.hermitian && h2.hermitian;
  return out;
}

}  // namespace

int Basis::index_of(std::string_view label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

Basis single_atom_basis() {
  return Basis{{"0", "1", "a", "r"}, {0, 0, 0, 1}, {0.0, 0.0, 1.0, 1.0}};
}

Basis optical_single_atom_basis() { return Basis{{"0", "1", "r"}, {0, 0, 1}, {0.0, 0.0, 1.0}}; }

Basis two_atom_basis(const Basis& single, bool drop_rr) {
  Basis out;
  const int d = single.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      out.labels.push_back(single.labels[i] + single.labels[j]);
      out.rydberg_count.push_back(single.rydberg_count[i] + single.rydberg_count[j]);
      out.phase_charge.push_back(single.phase_charge[i] + single.phase_charge[j]);
    }
  }
  if (drop_rr) {
    // |rr> is the last product state in both single-atom orderings.
    out.labels.pop_back();
    out.rydberg_count.pop_back();
    out.phase_charge.pop_back();
  }
  return out;
}

Eigen::VectorXcd basis_vector(const Basis& basis, std::string_view label) {
  const int idx = basis.index_of(label);
  if (idx < 0) throw Error(ErrorCode::InvalidArgument, "unknown basis label " + std::string(label));
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis.dim());
  v(idx) = 1.0;
  return v;
}

Eigen::VectorXcd symmetric_pair(const Basis& basis, char x, char y) {
  const std::string xy{x, y};
  const std::string yx{y, x};
  if (x == y) return basis_vector(basis, xy);
  return (basis_vector(basis, xy) + basis_vector(basis, yx)) / kSqrt2;
}

std::vector<int> swap_permutation(const Basis& basis) {
  std::vector<int> perm(basis.labels.size());
  for (std::size_t k = 0; k < basis.labels.size(); ++k) {
    const std::string& l = basis.labels[k];
    if (l.size() != 2) throw Error(ErrorCode::InvalidArgument, "swap needs a two-atom basis");
    const int other = basis.index_of(std::string{l[1], l[0]});
    if (other < 0) throw Error(ErrorCode::InvalidArgument, "basis not closed under swap");
    perm[k] = other;
  }
  return perm;
}

double microwave_frame_shift(const DressingParams& params) {
  return -dress_single(params).e_ls1 - params.delta_mw;
}

OperatorMatrix single_atom_hamiltonian(const DressingParams& params, double xi) {
  return single_atom_hamiltonian(params, xi, microwave_frame_shift(params));
}

OperatorMatrix single_atom_hamiltonian(const DressingParams& params, double xi, double delta_a) {
  params.validate();
  OperatorMatrix h;
  h.basis = single_atom_basis();
  h.matrix = Eigen::MatrixXcd::Zero(4, 4);
  h.matrix(kAux, kAux) = delta_a;
  h.matrix(kRyd, kRyd) = delta_a - params.delta_L;
  const cplx mw = 0.5 * params.omega_mw * std::polar(1.0, xi);
  h.matrix(kAux, kOne) = mw;
  h.matrix(kOne, kAux) = std::conj(mw);
  h.matrix(kRyd, kAux) = 0.5 * params.omega_L;
  h.matrix(kAux, kRyd) = 0.5 * params.omega_L;
  return h;
}

OperatorMatrix two_atom_hamiltonian(const DressingParams& params, double xi) {
  return two_atom_hamiltonian(params, params, xi, microwave_frame_shift(params));
}

OperatorMatrix two_atom_hamiltonian(const DressingParams& atom1, const DressingParams& atom2,
                                    double xi, double delta_a) {
  if (atom1.v_rr != atom2.v_rr) {
    throw Error(ErrorCode::InvalidArgument, "atoms must share the same V_rr");
  }
  const OperatorMatrix h1 = single_atom_hamiltonian(atom1, xi, delta_a);
  const OperatorMatrix h2 = single_atom_hamiltonian(atom2, xi, delta_a);
  return tensor_sum(h1, h2, atom1.v_rr);
}

OperatorMatrix optical_two_atom_hamiltonian(double omega_L, double delta_L, Interaction v_rr,
                                            double xi_L) {
  if (!(omega_L > 0.0)) throw Error(ErrorCode::ConfigInvalid, "omega_L must be positive", "omega_L");
  OperatorMatrix h;
  h.basis = optical_single_atom_basis();
  h.matrix = Eigen::MatrixXcd::Zero(3, 3);
  h.matrix(kOptRyd, kOptRyd) = -delta_L;
  const cplx laser = 0.5 * omega_L * std::polar(1.0, xi_L);
  h.matrix(kOptRyd, kOne) = laser;
  h.matrix(kOne, kOptRyd) = std::conj(laser);
  return tensor_sum(h, h, v_rr);
}

void MotionalParams::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw Error(ErrorCode::ConfigInvalid, std::string(field) + " is invalid", field);
  };
  require(std::isfinite(omega_L1) && omega_L1 >= 0.0, "omega_L1");
  require(std::isfinite(omega_L2) && omega_L2 >= 0.0, "omega_L2");
  require(std::isfinite(delta), "delta");
  require(std::isfinite(mass) && mass > 0.0, "mass");
  require(std::isfinite(k_L) && std::isfinite(p_rel) && std::isfinite(p_com), "momentum");
  if (!v_rr.is_infinite()) require(std::isfinite(v_rr.value()) && v_rr.value() >= 0.0, "v_rr");
}

double MotionalParams::omega_plus() const { return (omega_L1 + omega_L2) / kSqrt2; }
double MotionalParams::omega_minus() const { return (omega_L1 - omega_L2) / kSqrt2; }

OperatorMatrix motional_hamiltonian(const MotionalParams& mp) {
  mp.validate();
  const bool drop_rr = mp.v_rr.is_infinite();
  const int n = drop_rr ? 3 : 4;
  constexpr int gg = 0, bright = 1, dark = 2, rr = 3;

  OperatorMatrix h;
  h.basis.labels = {"gg", "B", "D", "rr"};
  h.basis.rydberg_count = {0, 1, 1, 2};
  h.basis.phase_charge = {0.0, 0.0, 0.0, 0.0};
  if (drop_rr) {
    h.basis.labels.pop_back();
    h.basis.rydberg_count.pop_back();
    h.basis.phase_charge.pop_back();
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const double doppler = mp.com_doppler();
  m(bright, bright) = -mp.delta + doppler;
  m(dark, dark) = -mp.delta + doppler;
  m(gg, bright) = m(bright, gg) = 0.5 * mp.omega_plus();
  m(gg, dark) = m(dark, gg) = 0.5 * mp.omega_minus();
  m(bright, dark) = m(dark, bright) = -mp.relative_coupling();
  if (!drop_rr) {
    m(rr, rr) = -(2.0 * mp.delta - mp.v_rr.value()) + 2.0 * doppler;
    m(bright, rr) = m(rr, bright) = 0.5 * mp.omega_plus();
    m(dark, rr) = m(rr, dark) = 0.5 * mp.omega_minus();
  }
  h.matrix = m.cast<cplx>();
  return h;
}

OperatorMatrix apply_decay(const OperatorMatrix& h, double gamma_r) {
  if (!(gamma_r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma_r must be non-negative");
  OperatorMatrix out = h;
  if (gamma_r == 0.0) return out;
  for (int k = 0; k < h.basis.dim(); ++k) {
    out.matrix(k, k) -= cplx(0.0, 0.5 * gamma_r * h.basis.rydberg_count[k]);
  }
  out.hermitian = false;
  return out;
}

}  // namespace spinflip
