// Test-only oracles, kept independent of the library implementation
// paths they check: a cyclic Jacobi eigensolver for Hermitian matrices,
// a dense generalized-eigenvalue route for the relaxed phase problems,
// a bisection waterfiller, and dense evaluations of the inverse-Gram
// objectives.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "riszf/channel.hpp"
#include "riszf/rng.hpp"
#include "riszf/types.hpp"
#include "riszf/zf_core.hpp"

namespace oracle {

using riszf::CMat;
using riszf::Complex;
using riszf::CVec;
using riszf::RVec;

// Cyclic Jacobi eigenvalue iteration for Hermitian matrices.  Returns
// eigenvalues sorted descending.
inline RVec jacobi_hermitian_eigenvalues(CMat a, int max_sweeps = 64) {
  const auto n = a.rows();
  a = 0.5 * (a + a.adjoint()).eval();
  if (n == 1) return RVec::Constant(1, std::real(a(0, 0)));
  const double scale = a.norm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    }
    if (std::sqrt(off) <= 1e-14 * (scale + 1e-300)) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double beta = std::abs(a(p, q));
        if (beta <= 1e-300) continue;
        // Absorb the phase so the 2x2 block is real symmetric, then apply
        // the classic rotation: J = diag(e^{j phi/2}, e^{-j phi/2}) * G.
        const double phi = std::arg(a(p, q));
        const double alpha = std::real(a(p, p));
        const double gamma = std::real(a(q, q));
        const double tau = (alpha - gamma) / (2.0 * beta);
        const double t =
            (tau >= 0.0 ? -1.0 : 1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex jpp = c * std::polar(1.0, phi / 2.0);
        const Complex jpq = s * std::polar(1.0, phi / 2.0);
        const Complex jqp = -s * std::polar(1.0, -phi / 2.0);
        const Complex jqq = c * std::polar(1.0, -phi / 2.0);
        const CVec col_p = a.col(p);
        const CVec col_q = a.col(q);
        a.col(p) = jpp * col_p + jqp * col_q;
        a.col(q) = jpq * col_p + jqq * col_q;
        const Eigen::RowVectorXcd row_p = a.row(p);
        const Eigen::RowVectorXcd row_q = a.row(q);
        a.row(p) = std::conj(jpp) * row_p + std::conj(jqp) * row_q;
        a.row(q) = std::conj(jpq) * row_p + std::conj(jqq) * row_q;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) ev[static_cast<std::size_t>(j)] = std::real(a(j, j));
  std::sort(ev.begin(), ev.end(), std::greater<>());
  RVec out(n);
  for (Eigen::Index j = 0; j < n; ++j) out(j) = ev[static_cast<std::size_t>(j)];
  return out;
}

// Largest generalized eigenvalue of (P, Q) with Q Hermitian positive
// definite, through a Cholesky whitening and the Jacobi solver.
inline double generalized_lambda_max(const CMat& p, const CMat& q) {
  Eigen::LLT<CMat> llt(0.5 * (q + q.adjoint()));
  const CMat l = llt.matrixL();
  const CMat x = l.triangularView<Eigen::Lower>().solve(
      CMat(0.5 * (p + p.adjoint())));
  const CMat w = l.triangularView<Eigen::Lower>().solve(CMat(x.adjoint()));
  return jacobi_hermitian_eigenvalues(w)(0);
}

// Dense value of the spectral-norm-relaxed user-selection bound in the
// full phase dimension: min over ||t||^2 = n_ris + 1 of
// tr(C^{-1}) - t^H D^H C^{-2} D t / (1 + t^H D^H C^{-1} D t).
inline double dense_relaxed_metric(const CMat& c, const CMat& d, int n_ris) {
  const double beta = static_cast<double>(n_ris) + 1.0;
  const CMat cinv = c.inverse();
  const CMat p_mat = beta * d.adjoint() * cinv * cinv * d;
  const CMat q_mat =
      CMat::Identity(d.cols(), d.cols()) + beta * d.adjoint() * cinv * d;
  const double lam = generalized_lambda_max(p_mat, q_mat);
  return cinv.diagonal().real().sum() - lam;
}

// Dense value of the weighted relaxed evaluation objective:
// min over ||t||^2 = n_ris + 1 of tr((C + D t t^H D^H)^{-1} diag(g)).
inline double dense_relaxed_objective(const CMat& c, const CMat& d,
                                      const RVec& g, int n_ris) {
  const double beta = static_cast<double>(n_ris) + 1.0;
  const CMat cinv = c.inverse();
  const CMat p_mat = beta * d.adjoint() * cinv * g.asDiagonal() * cinv * d;
  const CMat q_mat =
      CMat::Identity(d.cols(), d.cols()) + beta * d.adjoint() * cinv * d;
  const double lam = generalized_lambda_max(p_mat, q_mat);
  return (g.array() * cinv.diagonal().real().array()).sum() - lam;
}

// Dense weighted inverse-Gram trace at an explicit update direction.
inline double dense_weighted_trace(const CMat& c, const CVec& q_dir,
                                   const RVec& g) {
  const CMat gram = c + q_dir * q_dir.adjoint();
  return (gram.inverse() * g.asDiagonal()).diagonal().real().sum();
}

// Waterfilling by bisection on the water level.
inline RVec bisect_waterfill(const RVec& gains, double ptx) {
  const auto n = gains.size();
  const RVec inv = gains.cwiseInverse();
  double lo = inv.minCoeff();
  double hi = inv.maxCoeff() + ptx;
  const auto total = [&](double mu) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) sum += std::max(0.0, mu - inv(j));
    return sum;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid) < ptx) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double mu = 0.5 * (lo + hi);
  RVec powers(n);
  for (Eigen::Index j = 0; j < n; ++j) powers(j) = std::max(0.0, mu - inv(j));
  return powers;
}

// Random helpers, all driven by the library Rng for reproducibility.
inline CMat random_cmat(riszf::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.cnormal(1.0);
  }
  return m;
}

inline CMat random_hermitian(riszf::Rng& rng, Eigen::Index n) {
  const CMat m = random_cmat(rng, n, n);
  return 0.5 * (m + m.adjoint());
}

inline CMat random_psd(riszf::Rng& rng, Eigen::Index n, Eigen::Index rank) {
  const CMat m = random_cmat(rng, n, rank);
  return m * m.adjoint();
}

inline CVec random_unit_modulus(riszf::Rng& rng, Eigen::Index n,
                                bool pin_last = false) {
  CVec v(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    v(j) = std::polar(1.0, 2.0 * M_PI * rng.uniform());
  }
  if (pin_last && n > 0) v(n - 1) = 1.0;
  return v;
}

// A small desk-scale scenario used across the suites.
inline riszf::ScenarioConfig desk_config(int n_bs = 8, int n_ris = 16,
                                         int n_users = 4) {
  riszf::ScenarioConfig cfg;
  cfg.n_bs = n_bs;
  cfg.n_ris = n_ris;
  cfg.n_users = n_users;
  return cfg;
}

// Rows of the stacked coefficient matrix for the given users.
inline CMat d_rows_for(const riszf::SubspaceCache& cache,
                       const std::vector<int>& order) {
  CMat d(static_cast<Eigen::Index>(order.size()), cache.d_rows.cols());
  for (std::size_t j = 0; j < order.size(); ++j) {
    d.row(static_cast<Eigen::Index>(j)) = cache.d_rows.row(order[j]);
  }
  return d;
}

}  // namespace oracle
