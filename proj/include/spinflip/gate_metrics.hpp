#pragma once

#include <complex>

#include <Eigen/Dense>

#include "spinflip/hamiltonian.hpp"
#include "spinflip/propagator.hpp"

namespace spinflip {

/// Diagonal elements <k|U|k> on the four computational states.
struct ComputationalDiagonal {
  std::complex<double> u00{1.0, 0.0};
  std::complex<double> u01{1.0, 0.0};
  std::complex<double> u10{1.0, 0.0};
  std::complex<double> u11{1.0, 0.0};
};

ComputationalDiagonal computational_diagonal(const Basis& basis, const Eigen::MatrixXcd& u);

struct PhaseSet {
  double phi_01 = 0.0;
  double phi_10 = 0.0;
  double phi_11 = 0.0;
  /// |<k|U|k>| (population return amplitude), 00 first.
  double mag_00 = 1.0;
  double mag_01 = 1.0;
  double mag_10 = 1.0;
  double mag_11 = 1.0;
};

/// Phases relative to <00|U|00>, so phi_00 = 0. Throws ZERO_AMPLITUDE when a
/// diagonal element is below 1e-12 in magnitude.
PhaseSet computational_phases(const ComputationalDiagonal& d);
PhaseSet computational_phases(const Basis& basis, const Eigen::MatrixXcd& u);

struct CzFidelity {
  double fidelity = 0.0;
  double phi = 0.0;  ///< maximizing local phase, in [-pi, pi)
};

/// max over phi of |u00 + e^{-i phi}(u01 + u10) - e^{-2 i phi} u11|^2 / 16.
/// Works for sub-normalized (decaying) evolutions.
CzFidelity cz_fidelity(const ComputationalDiagonal& d);
CzFidelity cz_fidelity(const Basis& basis, const Eigen::MatrixXcd& u);

/// Fidelity at a fixed local phase, and its derivative with respect to the
/// four diagonal elements: dF = Re(sum_k conj(g_k) du_k).
struct FidelityAtPhase {
  double fidelity = 0.0;
  std::complex<double> g00, g01, g10, g11;
};
FidelityAtPhase cz_fidelity_at(const ComputationalDiagonal& d, double phi);

enum class DecayMethod { TrEstimate, NonHermitian };

/// TR_ESTIMATE: F_unitary - gamma_r * T_r from a decay-free record.
/// NONHERMITIAN: the fidelity of a record propagated with this gamma_r.
/// Throws METHOD_MISMATCH if the record's decay rate does not fit the method.
double decay_limited_fidelity(const GateRecord& record, double gamma_r, DecayMethod method);

}  // namespace spinflip
