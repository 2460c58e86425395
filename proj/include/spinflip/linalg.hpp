#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace spinflip {

using cplx = std::complex<double>;

/// Largest element of |A - A^dagger|.
double hermiticity_defect(const Eigen::MatrixXcd& a);

/// exp(-i * h * t) for a square complex generator.
///
/// Hermitian generators (defect < 1e-12) go through a self-adjoint
/// eigendecomposition, which is exact up to rounding and insensitive to
/// degenerate spectra. Non-Hermitian generators (decay included) are first
/// split into their decoupled sectors, each sector is diagonalized with a
/// complex Schur-based eigensolver, and a sector whose eigenvector matrix is
/// ill-conditioned falls back to Pade scaling-and-squaring.
Eigen::MatrixXcd propagator_exp(const Eigen::MatrixXcd& h, double t);

/// Connected components of the coupling graph |h_ij| > 0, each sorted
/// ascending. Components are ordered by their smallest index.
std::vector<std::vector<int>> coupled_sectors(const Eigen::MatrixXcd& h);

/// Among the eigenvectors of a real symmetric matrix, picks the one with the
/// largest |overlap| with `reference`. Throws DEGENERATE_BRANCH when the two
/// best overlaps agree to within `tie_tolerance`. The returned vector is sign
/// fixed so that its overlap with the reference is positive.
struct SelectedEigenpair {
  double value;
  Eigen::VectorXd vector;
};
SelectedEigenpair select_adiabatic_eigenpair(const Eigen::MatrixXd& symmetric,
                                             const Eigen::VectorXd& reference,
                                             double tie_tolerance = 1e-9);

}  // namespace spinflip
