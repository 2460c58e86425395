#include "spinflip/gate_metrics.hpp"

#include <cmath>

#include "spinflip/errors.hpp"
#include "spinflip/units.hpp"

namespace spinflip {

namespace {

using cplx = std::complex<double>;

constexpr int kScanPoints = 720;
constexpr double kDerivativeTol = 1e-10;

// z(phi) = a + b e^{-i phi} + c e^{-2 i phi} and F = |z|^2 / 16.
struct Quadratic {
  cplx a, b, c;

  cplx z(double phi) const {
    const cplx e = std::polar(1.0, -phi);
    return a + b * e + c * e * e;
  }
  double f(double phi) const { return std::norm(z(phi)) / 16.0; }
  // First and second derivatives of F.
  std::pair<double, double> derivatives(double phi) const {
    const cplx e = std::polar(1.0, -phi);
    const cplx zz = a + b * e + c * e * e;
    const cplx d1 = cplx(0, -1) * b * e - cplx(0, 2) * c * e * e;
    const cplx d2 = -b * e - 4.0 * c * e * e;
    const double f1 = 2.0 * std::real(std::conj(zz) * d1) / 16.0;
    const double f2 = 2.0 * (std::norm(d1) + std::real(std::conj(zz) * d2)) / 16.0;
    return {f1, f2};
  }
};

}  // namespace

ComputationalDiagonal computational_diagonal(const Basis& basis, const Eigen::MatrixXcd& u) {
  if (u.rows() != basis.dim() || u.cols() != basis.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "evolution operator does not match its basis");
  }
  auto element = [&](const char* label) {
    const int k = basis.index_of(label);
    if (k < 0) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("basis lacks computational state |") + label + ">");
    }
    return u(k, k);
  };
  return {element("00"), element("01"), element("10"), element("11")};
}

PhaseSet computational_phases(const ComputationalDiagonal& d) {
  for (const cplx& v : {d.u00, d.u01, d.u10, d.u11}) {
    if (std::abs(v) < 1e-12) {
      throw Error(ErrorCode::ZeroAmplitude, "diagonal element vanishes, phase undefined");
    }
  }
  const double ref = std::arg(d.u00);
  PhaseSet p;
  p.phi_01 = wrap_phase(std::arg(d.u01) - ref);
  p.phi_10 = wrap_phase(std::arg(d.u10) - ref);
  p.phi_11 = wrap_phase(std::arg(d.u11) - ref);
  p.mag_00 = std::abs(d.u00);
  p.mag_01 = std::abs(d.u01);
  p.mag_10 = std::abs(d.u10);
  p.mag_11 = std::abs(d.u11);
  return p;
}

PhaseSet computational_phases(const Basis& basis, const Eigen::MatrixXcd& u) {
  return computational_phases(computational_diagonal(basis, u));
}

CzFidelity cz_fidelity(const ComputationalDiagonal& d) {
  const Quadratic q{d.u00, d.u01 + d.u10, -d.u11};

  int best = 0;
  double best_f = -1.0;
  const double step = kTwoPi / kScanPoints;
  for (int k = 0; k < kScanPoints; ++k) {
    const double f = q.f(-kPi + k * step);
    if (f > best_f) {
      best_f = f;
      best = k;
    }
  }

  // Safeguarded Newton on F' inside the two neighbouring grid cells.
  double lo = -kPi + (best - 1) * step;
  double hi = -kPi + (best + 1) * step;
  double phi = -kPi + best * step;
  if (q.derivatives(lo).first >= 0.0 && q.derivatives(hi).first <= 0.0) {
    for (int it = 0; it < 100; ++it) {
      const auto [f1, f2] = q.derivatives(phi);
      if (std::abs(f1) < kDerivativeTol) break;
      if (f1 > 0.0) lo = phi; else hi = phi;
      double next = f2 < 0.0 ? phi - f1 / f2 : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      phi = next;
      if (hi - lo < 1e-15) break;
    }
  }
  const double f = q.f(phi);
  if (f < best_f) return {best_f, wrap_phase(-kPi + best * step)};
  return {f, wrap_phase(phi)};
}

CzFidelity cz_fidelity(const Basis& basis, const Eigen::MatrixXcd& u) {
  return cz_fidelity(computational_diagonal(basis, u));
}

FidelityAtPhase cz_fidelity_at(const ComputationalDiagonal& d, double phi) {
  const cplx e = std::polar(1.0, -phi);
  const cplx z = d.u00 + e * (d.u01 + d.u10) - e * e * d.u11;
  FidelityAtPhase out;
  out.fidelity = std::norm(z) / 16.0;
  // dF = (2/16) Re(conj(z) dz), written as Re(conj(g) du).
  const cplx w = z / 8.0;
  out.g00 = w;
  out.g01 = w * std::conj(e);
  out.g10 = w * std::conj(e);
  out.g11 = -w * std::conj(e * e);
  return out;
}

double decay_limited_fidelity(const GateRecord& record, double gamma_r, DecayMethod method) {
  if (!(gamma_r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma_r must be non-negative");
  const double f = cz_fidelity(record.basis, record.u_total).fidelity;
  if (method == DecayMethod::TrEstimate) {
    if (record.gamma_r != 0.0) {
      throw Error(ErrorCode::MethodMismatch, "T_r estimate needs a decay-free record");
    }
    if (gamma_r == 0.0) return f;
    return f - gamma_r * rydberg_time(record);
  }
  if (record.gamma_r != gamma_r) {
    throw Error(ErrorCode::MethodMismatch,
                "record was propagated with a different decay rate than requested");
  }
  return f;
}

}  // namespace spinflip
