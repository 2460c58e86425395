#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spinflip/dressed_model.hpp"

namespace spinflip {

/// Ordered basis with the bookkeeping the propagator needs.
///
/// One atom: {|0>, |1>, |a>, |r>} (microwave model) or {|0>, |1>, |r>}
/// (optical baseline). Two atoms: row-major tensor product, label "xy" means
/// atom 1 in x and atom 2 in y, index = d * i + j. With an infinite blockade
/// the |rr> state (always the last index) is removed.
struct Basis {
  std::vector<std::string> labels;
  /// Number of atoms in |r> per basis state (0, 1 or 2).
  std::vector<int> rydberg_count;
  /// Generator of the control phase: H(xi) = R(xi) H(0) R(xi)^dagger with
  /// R(xi) = exp(i xi diag(phase_charge)).
  std::vector<double> phase_charge;

  int dim() const { return static_cast<int>(labels.size()); }
  /// Index of a label, -1 if absent.
  int index_of(std::string_view label) const;
};

struct OperatorMatrix {
  Basis basis;
  Eigen::MatrixXcd matrix;
  bool hermitian = true;
};

Basis single_atom_basis();
Basis optical_single_atom_basis();
Basis two_atom_basis(const Basis& single, bool drop_rr);

/// Unit vector on a basis label. Throws INVALID_ARGUMENT for unknown labels.
Eigen::VectorXcd basis_vector(const Basis& basis, std::string_view label);
/// (|xy> + |yx>)/sqrt(2), or |xx> when x == y.
Eigen::VectorXcd symmetric_pair(const Basis& basis, char x, char y);
/// Basis permutation exchanging the two atoms (for two-character labels).
std::vector<int> swap_permutation(const Basis& basis);

/// Diagonal energy of |a> that puts the selected dressed branch at microwave
/// detuning params.delta_mw (exact resonance by default).
double microwave_frame_shift(const DressingParams& params);

/// 4x4 single-atom Hamiltonian in the rotating frame where |1> has energy 0.
OperatorMatrix single_atom_hamiltonian(const DressingParams& params, double xi);
/// Same with an explicit |a> frame energy (used when the microwave stays tuned
/// to a nominal resonance while the atom's parameters are perturbed).
OperatorMatrix single_atom_hamiltonian(const DressingParams& params, double xi, double delta_a);

/// H = h x 1 + 1 x h + V_rr |rr><rr| on the 16-state product basis (15 with
/// an infinite blockade).
OperatorMatrix two_atom_hamiltonian(const DressingParams& params, double xi);
/// Atoms with distinct parameters. V_rr is taken from atom1, the microwave
/// phase and Rabi frequency are common and delta_a is the shared frame energy.
OperatorMatrix two_atom_hamiltonian(const DressingParams& atom1, const DressingParams& atom2,
                                    double xi, double delta_a);

/// Optical laser-phase gate on {|0>, |1>, |r>}^2: (Omega_L/2)(e^{i xi_L}|r><1| + h.c.)
/// per atom, -Delta_L on |r>, V_rr on |rr>.
OperatorMatrix optical_two_atom_hamiltonian(double omega_L, double delta_L, Interaction v_rr,
                                            double xi_L);

/// Two atoms with unequal laser Rabi frequencies and classical momenta.
struct MotionalParams {
  double omega_L1 = 0.0;
  double omega_L2 = 0.0;
  double delta = 0.0;
  Interaction v_rr = Interaction::infinite();
  double k_L = 0.0;
  double mass = 1.0;
  double p_rel = 0.0;  ///< (p1 - p2) / 2
  double p_com = 0.0;  ///< p1 + p2

  void validate() const;
  double omega_plus() const;
  double omega_minus() const;
  double relative_coupling() const { return k_L * p_rel / mass; }
  double com_doppler() const { return k_L * p_com / (2.0 * mass); }
};

/// {|gg>, |B>, |D>, |rr>} Hamiltonian with bright/dark couplings and Doppler
/// terms. |rr> is dropped for an infinite blockade.
OperatorMatrix motional_hamiltonian(const MotionalParams& mp);

/// H - i (Gamma_r / 2) N_r with N_r the diagonal Rydberg occupancy.
OperatorMatrix apply_decay(const OperatorMatrix& h, double gamma_r);

}  // namespace spinflip
