#include "spinflip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "spinflip/errors.hpp"

namespace spinflip {

namespace {

constexpr cplx kI{0.0, 1.0};

Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd& w = es.eigenvalues();
  Eigen::VectorXcd phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::exp(-kI * w(k) * t);
  const Eigen::MatrixXcd& v = es.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

Eigen::MatrixXcd general_exp(const Eigen::MatrixXcd& h, double t) {
  const Eigen::Index n = h.rows();
  if (n == 1) return Eigen::MatrixXcd::Constant(1, 1, std::exp(-kI * h(0, 0) * t));

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() == Eigen::Success) {
    const Eigen::MatrixXcd& v = es.eigenvectors();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    const double residual =
        (h * v - v * es.eigenvalues().asDiagonal()).cwiseAbs().maxCoeff() / scale;
    const double rcond = lu.rcond();
    if (residual < 1e-11 && rcond > 1e-8) {
      Eigen::VectorXcd phases(n);
      for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::exp(-kI * es.eigenvalues()(k) * t);
      return v * phases.asDiagonal() * lu.inverse();
    }
  }
  Eigen::MatrixXcd arg = (-kI * t) * h;
  return arg.exp();
}

}  // namespace

double hermiticity_defect(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

std::vector<std::vector<int>> coupled_sectors(const Eigen::MatrixXcd& h) {
  const int n = static_cast<int>(h.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (h(i, j) != cplx{} || h(j, i) != cplx{}) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<int>> sectors;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(sectors.size());
      sectors.emplace_back();
    }
    sectors[slot[root]].push_back(i);
  }
  return sectors;
}

Eigen::MatrixXcd propagator_exp(const Eigen::MatrixXcd& h, double t) {
  if (h.rows() != h.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "generator must be square");
  }
  if (hermiticity_defect(h) < 1e-12) return hermitian_exp(h, t);

  const Eigen::Index n = h.rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& sector : coupled_sectors(h)) {
    const auto m = static_cast<Eigen::Index>(sector.size());
    Eigen::MatrixXcd block(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) block(i, j) = h(sector[i], sector[j]);
    const Eigen::MatrixXcd u = general_exp(block, t);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) out(sector[i], sector[j]) = u(i, j);
  }
  return out;
}

SelectedEigenpair select_adiabatic_eigenpair(const Eigen::MatrixXd& symmetric,
                                             const Eigen::VectorXd& reference,
                                             double tie_tolerance) {
  if (symmetric.rows() != symmetric.cols() || symmetric.rows() != reference.size()) {
    throw Error(ErrorCode::DimensionMismatch, "reference and matrix sizes differ");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric);
  const Eigen::VectorXd overlaps = (es.eigenvectors().transpose() * reference).cwiseAbs();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(overlaps.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return overlaps(a) > overlaps(b); });
  if (order.size() > 1 && overlaps(order[0]) - overlaps(order[1]) < tie_tolerance) {
    throw Error(ErrorCode::DegenerateBranch,
                "two eigenvectors are equally connected to the reference state");
  }
  const Eigen::Index best = order[0];
  Eigen::VectorXd v = es.eigenvectors().col(best);
  if (v.dot(reference) < 0) v = -v;
  return {es.eigenvalues()(best), v};
}

}  // namespace spinflip
