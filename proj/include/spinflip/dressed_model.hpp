#pragma once

#include <optional>

namespace spinflip {

/// Van der Waals shift of |rr>. The perfect-blockade limit is represented by
/// truncating |rr> out of the basis, never by a large number.
class Interaction {
 public:
  static Interaction infinite() { return Interaction{}; }
  static Interaction finite(double v_rr) { return Interaction{v_rr}; }

  bool is_infinite() const { return !value_.has_value(); }
  /// Throws INVALID_ARGUMENT for the infinite value.
  double value() const;

  bool operator==(const Interaction&) const = default;

 private:
  Interaction() = default;
  explicit Interaction(double v) : value_(v) {}
  std::optional<double> value_;
};

/// Which eigenvector of the a-r dressing block plays the role of |a~>.
///
/// LOWER is the lower-energy eigenvector; with the mixing angle
/// theta in [0, pi), tan(theta) = -Omega_L / Delta_L, its amplitudes are
/// (cos(theta/2), -sin(theta/2)) on (|a>, |r>). It is the branch adiabatically
/// connected to |a> for Delta_L <= 0. UPPER is the orthogonal eigenvector.
enum class Branch { Lower, Upper };

/// The branch connected to the bare auxiliary state for a given detuning.
Branch adiabatic_branch(double delta_L);

/// Drive and interaction parameters of the two-atom system, all angular
/// (rad/us) except gamma_r (1/us).
struct DressingParams {
  double omega_L = 0.0;
  double delta_L = 0.0;
  double omega_mw = 0.0;
  /// Microwave detuning from the dressed |a~> resonance.
  double delta_mw = 0.0;
  Interaction v_rr = Interaction::infinite();
  double gamma_r = 0.0;
  Branch branch = Branch::Lower;

  /// Throws CONFIG_INVALID naming the offending field.
  void validate() const;

  /// Convenience constructor from ordinary frequencies in MHz.
  static DressingParams from_mhz(double omega_L_mhz, double delta_L_mhz, double omega_mw_mhz,
                                 Branch branch = Branch::Lower);
};

/// One-atom dressed doublet.
///
/// amp_a and amp_r are the real amplitudes of |a> and |r> in the selected
/// branch, in the sign convention of the rotating-frame Hamiltonian
/// (amp_a >= 0). cos_half_theta()/sin_half_theta() are their magnitudes.
struct DressedAtom {
  double amp_a = 1.0;
  double amp_r = 0.0;
  double theta = 0.0;  ///< mixing angle of the selected branch
  double e_ls1 = 0.0;  ///< light shift of the selected branch
  double e_other = 0.0;
  double omega_mw_eff = 0.0;
  double gamma_eff = 0.0;

  double cos_half_theta() const;
  double sin_half_theta() const;
};

/// Two-atom dressed state |aa~> = alpha|aa> + beta|ar>_+ + gamma|rr>.
struct DressedPair {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;  ///< identically 0 for an infinite blockade
  double e_ls2 = 0.0;
  double j = 0.0;
  double omega_mw_eff_prime = 0.0;
  double gamma_eff_2 = 0.0;
};

DressedAtom dress_single(const DressingParams& params);

/// Diagonalizes the {|aa>, |ar>_+} block (infinite blockade) or the
/// {|aa>, |ar>_+, |rr>} block (finite blockade). In the blockaded block the
/// branch is chosen by energy order, like the one-atom doublet; with a finite
/// V_rr the eigenvector with the largest overlap with that blockaded state is
/// taken, and a tie within 1e-9 raises DEGENERATE_BRANCH.
DressedPair dress_pair(const DressingParams& params);

/// J = E(aa~) - 2 E(a~). Uses the closed form for an infinite blockade and the
/// numerical eigenvalues for a finite one.
double entangling_energy(const DressingParams& params);

/// (1/2)[Delta_L -+ (sqrt(2 Omega_L^2 + Delta_L^2) - 2 sqrt(Omega_L^2 + Delta_L^2))],
/// "-" for the lower branch and "+" for the upper.
double entangling_energy_closed_form(double omega_L, double delta_L, Branch branch);

struct WeakDressingAsymptotics {
  double delta_wdr;  ///< detuning magnitude at which J ~ Omega_mw
  double t_r_wdr;
};
WeakDressingAsymptotics weak_dressing_asymptotics(double omega_L, double omega_mw);

/// Weak-dressing entangling energy Omega_L^4 / (8 Delta_L^3) (sign follows
/// Delta_L, positive for red detuning).
double weak_dressing_entangling_energy(double omega_L, double delta_L);

struct StrongDressingAsymptotics {
  double j_max;
  double t_r_sdr;
  double tau_limit;
};
StrongDressingAsymptotics strong_dressing_asymptotics(double omega_L);

/// Red detuning (Delta_L <= 0, lower branch, infinite blockade) at which
/// J equals `target_j`. Returns nullopt if target_j exceeds J_max.
std::optional<double> detuning_for_entangling_energy(double omega_L, double target_j);

}  // namespace spinflip
