#include "riszf/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "riszf/ops_count.hpp"

namespace riszf::linalg {

namespace {

CMat symmetrized(const CMat& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace

HermitianEig hermitian_evd(const CMat& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("hermitian_evd: matrix must be square");
  }
  const auto n = a.rows();
  ops::add(static_cast<std::uint64_t>(n) * n * n);
  Eigen::SelfAdjointEigenSolver<CMat> solver(symmetrized(a));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_evd: eigensolver failed");
  }
  // Eigen sorts ascending; flip to descending.
  HermitianEig out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

RVec hermitian_eigenvalues(const CMat& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("hermitian_eigenvalues: matrix must be square");
  }
  const auto n = a.rows();
  ops::add(static_cast<std::uint64_t>(n) * n * n);
  Eigen::SelfAdjointEigenSolver<CMat> solver(symmetrized(a),
                                             Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eigenvalues: eigensolver failed");
  }
  return solver.eigenvalues().reverse();
}

ThinQr thin_qr(const CMat& m) {
  const auto rows = m.rows();
  const auto cols = m.cols();
  if (rows < cols) {
    throw DimensionError("thin_qr: need rows >= cols");
  }
  ops::add(static_cast<std::uint64_t>(rows) * cols * cols);
  Eigen::HouseholderQR<CMat> qr(m);
  ThinQr out;
  out.q = qr.householderQ() * CMat::Identity(rows, cols);
  out.r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
  return out;
}

CMat pseudoinverse(const CMat& m) {
  const auto rows = m.rows();
  const auto cols = m.cols();
  const auto k = std::min(rows, cols);
  ops::add(static_cast<std::uint64_t>(rows) * cols * k);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) {
    return CMat::Zero(cols, rows);
  }
  const double tol = 1e-12 * sv(0);
  RVec inv_sv = RVec::Zero(sv.size());
  for (Eigen::Index j = 0; j < sv.size(); ++j) {
    if (sv(j) > tol) inv_sv(j) = 1.0 / sv(j);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().adjoint();
}

EigPair principal_eigpair_psd_weighted(const CMat& a, const RVec& g) {
  if (a.rows() != a.cols() || a.rows() != g.size()) {
    throw DimensionError("principal_eigpair_psd_weighted: shape mismatch");
  }
  if ((g.array() <= 0.0).any()) {
    throw DomainError("principal_eigpair_psd_weighted: weights must be > 0");
  }
  const auto n = a.rows();
  ops::add(static_cast<std::uint64_t>(n) * n * n + n * n);
  const RVec g_sqrt = g.array().sqrt();
  // diag(g)^{1/2} A diag(g)^{1/2} is similar to A diag(g) and Hermitian.
  const CMat s = g_sqrt.asDiagonal() * a * g_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMat> solver(symmetrized(s));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("principal_eigpair_psd_weighted: solver failed");
  }
  EigPair out;
  out.value = solver.eigenvalues()(n - 1);
  CVec v = solver.eigenvectors().col(n - 1);
  v = v.array() / g_sqrt.array();  // back-transform to an eigenvector of A diag(g)
  out.vector = v / v.norm();
  return out;
}

}  // namespace riszf::linalg
